use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;

/// Append-only results log. Each entry is written with a single `write_all`
/// on a file opened in append mode, so lines never interleave.
pub struct RunLedger {
    path: PathBuf,
    file: Mutex<File>,
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set so that repeated
/// runs write identical ledgers.
pub fn unix_time() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.trim().parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunLedger {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| CliError::io(path, e))?;
        Ok(RunLedger { path: path.to_path_buf(), file: Mutex::new(file) })
    }

    /// Writes `<unix-time> <body>`.
    pub fn append(&self, body: &str) -> Result<(), CliError> {
        let line = format!("{} {}\n", unix_time(), body);
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        file.write_all(line.as_bytes()).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn search_improvement(&self, m: usize, t: usize, seed: u64, k: usize) -> Result<(), CliError> {
        self.append(&format!("m={m} t={t} seed={seed} k={k}"))
    }

    /// `cmd=<name> <key=value ...> result=<result>`; values with spaces are
    /// written with the spaces removed.
    pub fn command(&self, name: &str, params: &[(&str, String)], result: &str) -> Result<(), CliError> {
        let mut body = format!("cmd={name}");
        for (k, v) in params {
            body.push_str(&format!(" {k}={}", v.replace(char::is_whitespace, "")));
        }
        body.push_str(&format!(" result={}", result.replace(char::is_whitespace, "_")));
        self.append(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_are_appended() {
        let dir = std::env::temp_dir().join(format!("gh-ledger-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("runs.log");
        let _ = std::fs::remove_file(&path);
        let ledger = RunLedger::open(&path).unwrap();
        ledger.search_improvement(8, 2, 7, 40).unwrap();
        ledger.command("verify", &[("solution", "a b.sol".into())], "ok k=6").unwrap();
        drop(ledger);
        let again = RunLedger::open(&path).unwrap();
        again.append("x").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].ends_with(" m=8 t=2 seed=7 k=40"));
        assert!(lines[1].ends_with(" cmd=verify solution=ab.sol result=ok_k=6"));
        assert!(lines[0].split(' ').next().unwrap().parse::<u64>().is_ok());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
