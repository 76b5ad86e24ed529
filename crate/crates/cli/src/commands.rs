use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use gardenhose::compose::{self as product, wreath_family_bound};
use gardenhose::exact::max_perm_submatrix_exact;
use gardenhose::groups::{
    self, classify, classify_group, generate_group, spot_check, standard_base, w3_conjugator_readings, BasePair,
    Classification, ClassifyOptions, GHGroupReport, GroupSpec, Witness, W3_CONJUGATOR_LITERAL,
};
use gardenhose::search::{default_bob_hoses, restart_loop, SearchOutcome, SearchParams, SearchSpace};
use gardenhose::solution::parse_pair_line;
use gardenhose::{
    antichain_check, build_full_matrix, build_matrix, lift_to_last_row_block, simulate_flow, verify_solution,
    ConfigMatrix, Configuration, Side, Solution,
};
use serde_json::{json, Value};

use crate::error::{exit, CliError};
use crate::report::Outcome;
use crate::{
    BoundArgs, BuiltinArgs, ClassifyArgs, ComposeArgs, Context, MatrixArgs, OrderArgs, SearchArgs, SimulateArgs,
    VerifyArgs, W3Args, WreathArgs,
};

/// Largest inline listing in a report; bigger results go to `--out` files.
const INLINE_LIMIT: usize = 4096;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn record(ctx: &Context, name: &str, params: &[(&str, String)], result: &str) -> Result<(), CliError> {
    match &ctx.ledger {
        Some(l) => l.command(name, params, result),
        None => Ok(()),
    }
}

fn path_value(p: &Option<std::path::PathBuf>) -> Value {
    p.as_ref().map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

fn ratio(m: usize, k: usize) -> Value {
    if k >= 2 {
        json!(m as f64 / (k as f64).log2())
    } else {
        Value::Null
    }
}

fn pair_lines(s: &Solution) -> Vec<String> {
    s.pairs.iter().map(|(a, b)| format!("A={a} B={b}")).collect()
}

pub fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<Outcome, CliError> {
    let alice = Configuration::parse(Side::Alice, a.m, &a.alice)?;
    let bob = Configuration::parse(Side::Bob, a.m, &a.bob)?;
    let o = simulate_flow(&alice, &bob)?;
    record(
        ctx,
        "simulate",
        &[("m", a.m.to_string()), ("alice", alice.to_string()), ("bob", bob.to_string())],
        &format!("bit={}", o.bit()),
    )?;
    Ok(Outcome::ok(json!({
        "m": a.m,
        "alice": alice.to_string(),
        "bob": bob.to_string(),
        "exit_side": o.exit_side.to_string(),
        "exit_pipe": o.exit_pipe,
        "path": o.path,
        "bit": o.bit(),
    })))
}

pub fn matrix(ctx: &Context, a: &MatrixArgs) -> Result<Outcome, CliError> {
    let mat = if let Some(p) = &a.import {
        let mat = ConfigMatrix::import(&read(p)?)?;
        if let Some(m) = a.m.filter(|&m| m != mat.m) {
            return Err(CliError::Invalid(format!("{} holds a matrix for m={}, not m={m}", p.display(), mat.m)));
        }
        mat
    } else {
        let m = a.m.ok_or_else(|| CliError::Usage("--m is required".into()))?;
        if a.alice_hoses.is_empty() && a.bob_hoses.is_empty() {
            build_full_matrix(m, ctx.memory_budget)?
        } else {
            let all_alice: Vec<usize> = (1..=m.div_ceil(2)).collect();
            let all_bob: Vec<usize> = (1..=m.saturating_sub(1) / 2).collect();
            let pick = |given: &Vec<usize>, all: &Vec<usize>| if given.is_empty() { all.clone() } else { given.clone() };
            build_matrix(m, &pick(&a.alice_hoses, &all_alice), &pick(&a.bob_hoses, &all_bob), ctx.memory_budget)?
        }
    };
    if let Some(out) = &a.out {
        write(out, &mat.export())?;
    }
    let mut report = json!({
        "m": mat.m,
        "rows": mat.rows.len(),
        "cols": mat.cols.len(),
        "ones": mat.bits.count_ones(),
        "out": path_value(&a.out),
    });
    if a.out.is_none() && mat.rows.len() * mat.cols.len() <= INLINE_LIMIT {
        let bits: Vec<String> = (0..mat.rows.len())
            .map(|r| (0..mat.cols.len()).map(|c| if mat.get(r, c) { '1' } else { '0' }).collect())
            .collect();
        report["row_labels"] = json!(mat.rows.iter().map(|c| c.to_string()).collect::<Vec<_>>());
        report["col_labels"] = json!(mat.cols.iter().map(|c| c.to_string()).collect::<Vec<_>>());
        report["bits"] = json!(bits);
    }
    let mut result = format!("rows={} cols={}", mat.rows.len(), mat.cols.len());
    if a.exact {
        let e = max_perm_submatrix_exact(&mat, a.exact_limit)?;
        report["exact_max"] = json!(e.size);
        report["exact_witness"] = json!(pair_lines(&e.witness));
        result.push_str(&format!(" exact_max={}", e.size));
    }
    record(ctx, "matrix", &[("m", mat.m.to_string())], &result)?;
    Ok(Outcome::ok(report))
}

fn parse_hose_counts(m: usize, text: Option<&str>) -> Result<Vec<usize>, CliError> {
    let max_t = m.saturating_sub(1) / 2;
    match text.map(str::trim) {
        None => Ok(vec![default_bob_hoses(m)]),
        Some("all") => Ok((1..=max_t).collect()),
        Some(list) => list
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("`{p}` is not a hose count"))))
            .collect(),
    }
}

fn fresh_seed() -> u64 {
    let d = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    d.as_secs().rotate_left(32) ^ u64::from(d.subsec_nanos())
}

fn secs(v: Option<f64>, name: &str) -> Result<Option<Duration>, CliError> {
    v.map(|s| Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("--{name} {s} is not a duration"))))
        .transpose()
}

struct Best {
    k: usize,
    error: Option<CliError>,
}

pub fn search(ctx: &Context, a: &SearchArgs) -> Result<Outcome, CliError> {
    let ts = parse_hose_counts(a.m, a.bob_hoses.as_deref())?;
    let (seed, generated) = match a.seed {
        Some(s) => (s, false),
        None => (fresh_seed(), true),
    };
    // Wall-clock defaults only apply when no step budget makes the run reproducible.
    let step_budget = a.max_steps.is_some() || a.no_improve_steps.is_some();
    let default_secs = |d: u64| (!step_budget).then(|| Duration::from_secs(d));
    let no_improve_timeout = secs(a.no_improve_timeout, "no-improve-timeout")?.or(default_secs(10));
    let max_wall_time = secs(a.max_time, "max-time")?.or(default_secs(60));

    let best = Mutex::new(Best { k: 0, error: None });
    let mut runs: Vec<SearchOutcome> = Vec::new();
    for &t in &ts {
        let params = SearchParams {
            discard_prob: a.discard_prob,
            no_improve_timeout,
            max_wall_time,
            max_steps: a.max_steps,
            no_improve_steps: a.no_improve_steps,
            target_k: a.target,
            ..SearchParams::new(a.m, t, seed)
        };
        params.validate()?;
        let space = SearchSpace::new(a.m, t, ctx.memory_budget)?;
        let observer = |ev: gardenhose::search::ImprovementEvent<'_>| {
            let mut b = best.lock().unwrap_or_else(|p| p.into_inner());
            if ev.solution.k() <= b.k || b.error.is_some() {
                return;
            }
            b.k = ev.solution.k();
            let logged = match &ctx.ledger {
                Some(l) => l.search_improvement(ev.m, ev.bob_hoses, ev.seed, b.k),
                None => Ok(()),
            };
            let saved = match &a.out {
                Some(p) => write(p, &ev.solution.to_text()),
                None => Ok(()),
            };
            if let Err(e) = logged.and(saved) {
                b.error = Some(e);
            }
        };
        let outcome = restart_loop(&space, &params, a.restarts, a.jobs, &observer)?;
        if let Some(e) = best.lock().unwrap_or_else(|p| p.into_inner()).error.take() {
            return Err(e);
        }
        runs.extend(outcome.runs);
        if a.target.is_some_and(|target| runs.iter().any(|r| r.best.k() >= target)) {
            break;
        }
    }
    let top = runs
        .iter()
        .fold(None::<&SearchOutcome>, |acc, r| match acc {
            Some(b) if b.best.k() >= r.best.k() => Some(b),
            _ => Some(r),
        })
        .ok_or_else(|| CliError::Internal("no search run completed".into()))?;
    if let Some(p) = &a.out {
        write(p, &top.best.to_text())?;
    }
    let t_list = ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
    record(
        ctx,
        "search",
        &[("m", a.m.to_string()), ("t", t_list), ("seed", seed.to_string()), ("restarts", a.restarts.to_string())],
        &format!("k={} t={} seed={}", top.best.k(), top.bob_hoses, top.seed),
    )?;
    let run_rows: Vec<Value> = runs
        .iter()
        .map(|r| json!({ "t": r.bob_hoses, "seed": r.seed, "k": r.best.k(), "steps": r.steps, "stop": format!("{:?}", r.stop) }))
        .collect();
    Ok(Outcome::ok(json!({
        "m": a.m,
        "bob_hoses": ts,
        "seed": seed,
        "seed_generated": generated,
        "restarts": a.restarts,
        "best_k": top.best.k(),
        "best_t": top.bob_hoses,
        "best_seed": top.seed,
        "ratio": ratio(a.m, top.best.k()),
        "target_reached": a.target.map(|t| top.best.k() >= t),
        "out": path_value(&a.out),
        "runs": run_rows,
    })))
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Result<Outcome, CliError> {
    let s = Solution::from_text(&read(&a.solution)?)?;
    let bob: Vec<Configuration> = s.bob().cloned().collect();
    let antichain = antichain_check(&bob);
    let mut report = json!({
        "solution": a.solution.display().to_string(),
        "m": s.m,
        "k": s.k(),
        "ok": true,
        "violation": null,
        "antichain": antichain.is_ok(),
        "covering_pair": antichain.err().map(|(y, z)| json!([y, z])),
    });
    let mut code = exit::OK;
    let result = match verify_solution(&s) {
        Ok(()) => {
            if let Some(out) = &a.lift {
                let lifted = lift_to_last_row_block(&s)?;
                let lifted_ok = verify_solution(&lifted).is_ok();
                write(out, &lifted.to_text())?;
                report["lifted"] = json!({ "out": out.display().to_string(), "k": lifted.k(), "ok": lifted_ok });
                if !lifted_ok {
                    code = exit::FAILED;
                }
            }
            format!("ok k={}", s.k())
        }
        Err(v) => {
            report["ok"] = json!(false);
            report["violation"] = json!({ "row": v.row, "col": v.col, "expected": v.expected, "got": v.got });
            code = exit::FAILED;
            format!("violation row={} col={}", v.row, v.col)
        }
    };
    record(ctx, "verify", &[("solution", a.solution.display().to_string())], &result)?;
    Ok(Outcome { report, code })
}

pub fn compose(ctx: &Context, a: &ComposeArgs) -> Result<Outcome, CliError> {
    let s = Solution::from_text(&read(&a.solution)?)?;
    let c = product::compose(&s, a.t, a.cap)?;
    let check = !a.no_verify && (a.verify || c.k() <= INLINE_LIMIT);
    let verified = if check {
        if let Err(v) = verify_solution(&c) {
            return Err(CliError::Failed(format!("composed solution does not verify: {v}")));
        }
        Some(true)
    } else {
        None
    };
    if let Some(out) = &a.out {
        write(out, &c.to_text())?;
    }
    record(
        ctx,
        "compose",
        &[("solution", a.solution.display().to_string()), ("t", a.t.to_string())],
        &format!("m={} k={}", c.m, c.k()),
    )?;
    Ok(Outcome::ok(json!({
        "input_m": s.m,
        "input_k": s.k(),
        "t": a.t,
        "m": c.m,
        "k": c.k(),
        "verified": verified,
        "ratio": ratio(c.m, c.k()),
        "out": path_value(&a.out),
    })))
}

pub fn bound(ctx: &Context, a: &BoundArgs) -> Result<Outcome, CliError> {
    if let Some(levels) = a.wreath_levels {
        let rows = (1..=levels)
            .map(|l| {
                let b = wreath_family_bound(l)?;
                Ok(json!({ "levels": l, "m": b.m, "k": b.k.to_string(), "ratio": b.ratio }))
            })
            .collect::<Result<Vec<Value>, CliError>>()?;
        let limit = 2.0 / 3f64.log2();
        record(ctx, "bound", &[("wreath_levels", levels.to_string())], &format!("limit={limit:.6}"))?;
        return Ok(Outcome::ok(json!({ "family": rows, "limit": limit })));
    }
    let (m, k) = match (a.m, a.k) {
        (Some(m), Some(k)) => (m, k),
        _ => return Err(CliError::Usage("--m and --k are required".into())),
    };
    let b = gardenhose::bound(m, k)?;
    record(ctx, "bound", &[("m", m.to_string()), ("k", k.to_string())], &format!("ratio={:.6}", b.ratio))?;
    Ok(Outcome::ok(json!({ "m": b.m, "k": b.k.to_string(), "log2_k": k.log2(), "ratio": b.ratio })))
}

fn group_report_json(r: &GHGroupReport, out: &Option<std::path::PathBuf>) -> Value {
    let witness = match &r.witness {
        Witness::Solution(s) => {
            let mut w = json!({ "kind": "solution", "k": s.k(), "verified": verify_solution(s).is_ok() });
            if s.k() <= 100 {
                w["pairs"] = json!(pair_lines(s));
            }
            w
        }
        Witness::ReducedCertificate { simulations } => json!({ "kind": "reduced-certificate", "simulations": simulations }),
        Witness::Violation(v) => json!({ "kind": "violation", "detail": v.to_string() }),
    };
    json!({
        "m": r.m,
        "t": r.t,
        "classification": r.classification.to_string(),
        "group_order": r.group_order,
        "solution_size": r.solution_size,
        "implied_ratio": r.implied_ratio,
        "strict_failure": r.strict_failure.as_ref().map(|v| v.to_string()),
        "witness": witness,
        "out": path_value(out),
    })
}

fn finish_group(
    ctx: &Context,
    name: &str,
    params: &[(&str, String)],
    r: &GHGroupReport,
    out: &Option<std::path::PathBuf>,
) -> Result<Outcome, CliError> {
    if let (Some(p), Witness::Solution(s)) = (out, &r.witness) {
        write(p, &s.to_text())?;
    }
    record(
        ctx,
        name,
        params,
        &format!("{} order={} size={}", r.classification, r.group_order, r.solution_size),
    )?;
    let code = if r.classification == Classification::NotGH { exit::FAILED } else { exit::OK };
    Ok(Outcome { report: group_report_json(r, out), code })
}

fn read_base(path: &Path, m: usize) -> Result<BasePair, CliError> {
    let text = read(path)?;
    let (line, content) = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| CliError::Parse(format!("{}: no `A=<config> B=<config>` line", path.display())))?;
    let (a, b) = parse_pair_line(m, content).map_err(|e| CliError::Parse(format!("{}:{line}: {e}", path.display())))?;
    Ok(BasePair::new(a, b)?)
}

pub fn group_classify(ctx: &Context, a: &ClassifyArgs) -> Result<Outcome, CliError> {
    let spec = GroupSpec::from_text(&read(&a.generators)?, Some(a.m))?;
    let base = match (&a.base, a.t) {
        (Some(p), _) => read_base(p, a.m)?,
        (None, Some(t)) => standard_base(a.m, t)?,
        (None, None) => return Err(CliError::Usage("either --t or --base is required".into())),
    };
    let opts = ClassifyOptions { max_order: a.limits.max_order, weak_threshold: a.limits.weak_threshold, ..Default::default() };
    let r = classify(&spec, &base, &opts)?;
    finish_group(
        ctx,
        "group-classify",
        &[("m", a.m.to_string()), ("t", base.t.to_string()), ("generators", a.generators.display().to_string())],
        &r,
        &a.out,
    )
}

pub fn group_wreath(ctx: &Context, a: &WreathArgs) -> Result<Outcome, CliError> {
    let spec = groups::wreath_generators(a.levels)?;
    let points = 3u32.pow(a.levels);
    let order = format!("3^{}", (points - 1) / 2);
    let generated = if a.levels <= 3 { Some(generate_group(&spec, groups::DEFAULT_MAX_ORDER)?.order()) } else { None };
    if let Some(p) = &a.out {
        write(p, &spec.to_text())?;
    }
    record(ctx, "group-wreath", &[("levels", a.levels.to_string())], &format!("order={order}"))?;
    Ok(Outcome::ok(json!({
        "levels": a.levels,
        "degree": spec.degree,
        "generators": spec.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "order": order,
        "generated_order": generated,
        "out": path_value(&a.out),
    })))
}

pub fn group_w2(ctx: &Context, a: &BuiltinArgs) -> Result<Outcome, CliError> {
    let r = classify(&groups::builtin_w2(), &standard_base(10, 2)?, &ClassifyOptions::default())?;
    finish_group(ctx, "group-w2", &[], &r, &a.out)
}

pub fn group_w3(ctx: &Context, a: &W3Args) -> Result<Outcome, CliError> {
    let base = standard_base(28, 7)?;
    let opts = ClassifyOptions { max_order: a.max_order, weak_threshold: 0, ..Default::default() };
    let mut attempts = Vec::new();
    let mut found = None;
    for reading in w3_conjugator_readings(a.repair) {
        let started = Instant::now();
        let group = generate_group(&reading.spec, opts.max_order)?;
        let verdict = match classify_group(&group, &base, &opts) {
            Ok(r) => Ok(r),
            Err(groups::GroupError::WeakCheckTooLarge { strict_failure, .. }) => Err(strict_failure),
            Err(e) => return Err(e.into()),
        };
        let strict = verdict.is_ok();
        attempts.push(json!({
            "reading": reading.description,
            "conjugator": reading.conjugator.to_string(),
            "convention": reading.convention.to_string(),
            "group_order": group.order(),
            "strict": strict,
            "failure": verdict.as_ref().err(),
            "seconds": (started.elapsed().as_secs_f64() * 10.0).round() / 10.0,
        }));
        if let Ok(r) = verdict {
            let spot = spot_check(&group, &base, a.spot_checks, a.seed);
            found = Some((reading, r, spot));
            break;
        }
    }
    let (report, code, result) = match found {
        Some((reading, r, spot)) => {
            let code = if spot.failures.is_empty() { exit::OK } else { exit::FAILED };
            let report = json!({
                "m": 28,
                "t": 7,
                "literal_conjugator": W3_CONJUGATOR_LITERAL,
                "classification": r.classification.to_string(),
                "group_order": r.group_order,
                "order": "3^13",
                "implied_ratio": r.implied_ratio,
                "reading": reading.description,
                "conjugator": reading.conjugator.to_string(),
                "spot_check": {
                    "diagonal": spot.diagonal_checked,
                    "off_diagonal": spot.off_diagonal_checked,
                    "failures": spot.failures.len(),
                    "seed": a.seed,
                },
                "attempts": attempts,
            });
            (report, code, format!("Strict order={} reading={}", r.group_order, reading.conjugator))
        }
        None => {
            let report = json!({
                "m": 28,
                "t": 7,
                "literal_conjugator": W3_CONJUGATOR_LITERAL,
                "classification": "unresolved",
                "finding": "no reading of the printed conjugator gives a strict (28,7) group under the standard base",
                "repair_search": a.repair,
                "attempts": attempts,
            });
            (report, exit::FAILED, format!("unresolved attempts={}", attempts.len()))
        }
    };
    record(ctx, "group-w3", &[("repair", a.repair.to_string()), ("seed", a.seed.to_string())], &result)?;
    Ok(Outcome { report, code })
}

pub fn group_order(ctx: &Context, a: &OrderArgs) -> Result<Outcome, CliError> {
    let spec = GroupSpec::from_text(&read(&a.generators)?, a.degree)?;
    let g = generate_group(&spec, a.max_order)?;
    record(ctx, "group-order", &[("generators", a.generators.display().to_string())], &format!("order={}", g.order()))?;
    Ok(Outcome::ok(json!({ "degree": spec.degree, "generators": spec.generators.len(), "order": g.order() })))
}
