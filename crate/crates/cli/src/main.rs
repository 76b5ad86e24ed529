//! `gardenhose`: command-line workbench for the garden hose model.

mod commands;
mod error;
mod ledger;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "gardenhose", version, about = "Garden hose model workbench")]
struct Cli {
    /// Print reports as JSON instead of `key: value` lines.
    #[arg(long, global = true)]
    json: bool,
    /// Append a line per result (and per search improvement) to this file.
    #[arg(long, global = true, value_name = "PATH")]
    ledger: Option<PathBuf>,
    /// Byte budget for dense bit tables, e.g. `1G`, `512M`, `65536`.
    #[arg(long, global = true, env = "GH_MEMORY_BUDGET", value_name = "BYTES", value_parser = parse_bytes)]
    memory_budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the water for one Alice/Bob configuration pair.
    Simulate(SimulateArgs),
    /// Build (and optionally export or solve exactly) a configuration matrix.
    Matrix(MatrixArgs),
    /// Randomised search for a large permutation submatrix.
    Search(SearchArgs),
    /// Check every entry of a solution file.
    Verify(VerifyArgs),
    /// Product construction: a k-pair solution on m pipes to k^t pairs on m*t pipes.
    Compose(ComposeArgs),
    /// The coefficient m / log2(k).
    Bound(BoundArgs),
    /// Permutation groups acting on a base construction.
    #[command(subcommand)]
    Group(GroupCommand),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub m: usize,
    /// Alice's hoses, e.g. `0-1,2-3` (`-` for none).
    #[arg(long, allow_hyphen_values = true)]
    pub alice: String,
    /// Bob's hoses, e.g. `1-4`.
    #[arg(long, allow_hyphen_values = true)]
    pub bob: String,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(long, required_unless_present = "import")]
    pub m: Option<usize>,
    /// Alice hose counts to include (default: all).
    #[arg(long, value_delimiter = ',')]
    pub alice_hoses: Vec<usize>,
    /// Bob hose counts to include (default: all).
    #[arg(long, value_delimiter = ',')]
    pub bob_hoses: Vec<usize>,
    /// Write the matrix in the plain-text exchange format.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Read a previously exported matrix instead of building one.
    #[arg(long, conflicts_with_all = ["alice_hoses", "bob_hoses"])]
    pub import: Option<PathBuf>,
    /// Also compute the largest permutation submatrix exactly.
    #[arg(long)]
    pub exact: bool,
    /// Refuse exact search above this many one-entries.
    #[arg(long, default_value_t = gardenhose::exact::DEFAULT_EXACT_LIMIT)]
    pub exact_limit: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub m: usize,
    /// Bob hose count(s): a number, a comma list, or `all`.
    #[arg(long, alias = "t")]
    pub bob_hoses: Option<String>,
    /// Seed of the first run; generated and printed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.25)]
    pub discard_prob: f64,
    /// Stop a run after this many seconds without improvement.
    #[arg(long, value_name = "SECS")]
    pub no_improve_timeout: Option<f64>,
    /// Stop a run after this many seconds.
    #[arg(long, value_name = "SECS")]
    pub max_time: Option<f64>,
    /// Stop a run after this many steps (reproducible budget).
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Stop a run after this many steps without improvement (reproducible budget).
    #[arg(long)]
    pub no_improve_steps: Option<u64>,
    /// Stop once a submatrix of this size is found.
    #[arg(long)]
    pub target: Option<usize>,
    /// Independent runs per hose count, with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Runs executed in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Best solution file, rewritten on every improvement.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub solution: PathBuf,
    /// Also lift every row to the last row block and write the result.
    #[arg(long, value_name = "PATH")]
    pub lift: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long)]
    pub solution: PathBuf,
    /// Number of blocks.
    #[arg(long)]
    pub t: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = gardenhose::compose::DEFAULT_COMPOSE_CAP)]
    pub cap: usize,
    /// Check all entries of the result (default: when it has at most 4096 pairs).
    #[arg(long, overrides_with = "no_verify")]
    pub verify: bool,
    #[arg(long)]
    pub no_verify: bool,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, required_unless_present = "wreath_levels")]
    pub m: Option<u64>,
    /// Solution size; `base^exp` is accepted.
    #[arg(long, required_unless_present = "wreath_levels")]
    pub k: Option<gardenhose::PowerOf>,
    /// Bounds of the C3-wreath family for levels 1..=L instead.
    #[arg(long, conflicts_with_all = ["m", "k"])]
    pub wreath_levels: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum GroupCommand {
    /// Classify a group given by a generator file.
    Classify(ClassifyArgs),
    /// Generators of C3 wr ... wr C3.
    Wreath(WreathArgs),
    /// The 81-element wreath group on 10 pipes.
    W2(BuiltinArgs),
    /// The 3^13-element wreath group on 28 pipes.
    W3(W3Args),
    /// Order of a group given by a generator file.
    Order(OrderArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub m: usize,
    /// Bob hose count of the standard base.
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub generators: PathBuf,
    /// File with one `A=<config> B=<config>` line replacing the standard base.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[command(flatten)]
    pub limits: GroupLimits,
    /// Write the witness solution here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GroupLimits {
    #[arg(long, default_value_t = gardenhose::groups::DEFAULT_MAX_ORDER)]
    pub max_order: usize,
    /// Largest order for which the full matrix is built.
    #[arg(long, default_value_t = 10_000)]
    pub weak_threshold: usize,
}

#[derive(Debug, Args)]
pub struct WreathArgs {
    #[arg(long)]
    pub levels: u32,
    /// Write the generator file here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuiltinArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct W3Args {
    /// Try further readings of the misprinted conjugator if the primary one fails.
    #[arg(long)]
    pub repair: bool,
    /// Random off-diagonal pairs simulated directly for a strict reading.
    #[arg(long, default_value_t = 100_000)]
    pub spot_checks: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = gardenhose::groups::DEFAULT_MAX_ORDER)]
    pub max_order: usize,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(long)]
    pub generators: PathBuf,
    /// Degree; defaults to the file's `degree:` line or its largest point.
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long, default_value_t = gardenhose::groups::DEFAULT_MAX_ORDER)]
    pub max_order: usize,
}

fn parse_bytes(text: &str) -> Result<usize, String> {
    let t = text.trim();
    let (digits, scale) = match t.char_indices().last() {
        Some((i, 'K' | 'k')) => (&t[..i], 1usize << 10),
        Some((i, 'M' | 'm')) => (&t[..i], 1 << 20),
        Some((i, 'G' | 'g')) => (&t[..i], 1 << 30),
        _ => (t, 1),
    };
    digits
        .trim()
        .parse::<usize>()
        .ok()
        .and_then(|n| n.checked_mul(scale))
        .ok_or_else(|| format!("`{text}` is not a byte count"))
}

/// Options shared by every command.
pub struct Context {
    pub json: bool,
    pub ledger: Option<ledger::RunLedger>,
    pub memory_budget: usize,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let ledger = cli.ledger.as_deref().map(ledger::RunLedger::open).transpose()?;
    let ctx = Context {
        json: cli.json,
        ledger,
        memory_budget: cli.memory_budget.unwrap_or(gardenhose::matrix::DEFAULT_MEMORY_BUDGET),
    };
    let outcome = match &cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a)?,
        Command::Matrix(a) => commands::matrix(&ctx, a)?,
        Command::Search(a) => commands::search(&ctx, a)?,
        Command::Verify(a) => commands::verify(&ctx, a)?,
        Command::Compose(a) => commands::compose(&ctx, a)?,
        Command::Bound(a) => commands::bound(&ctx, a)?,
        Command::Group(g) => match g {
            GroupCommand::Classify(a) => commands::group_classify(&ctx, a)?,
            GroupCommand::Wreath(a) => commands::group_wreath(&ctx, a)?,
            GroupCommand::W2(a) => commands::group_w2(&ctx, a)?,
            GroupCommand::W3(a) => commands::group_w3(&ctx, a)?,
            GroupCommand::Order(a) => commands::group_order(&ctx, a)?,
        },
    };
    report::print(&outcome.report, ctx.json);
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if json {
                println!("{}", serde_json::json!({ "error": e.to_string(), "exit_code": e.code() }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.code())
        }
    }
}
