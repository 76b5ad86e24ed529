//! Configuration enumeration and bit-packed configuration matrices.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::flow::{self, Configuration, FlowError, Side, TAP};

/// Default ceiling for a bit table: 1 GiB.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("{0}")]
    Range(String),
    #[error("bit table needs {needed} bytes, over the memory budget of {budget} bytes")]
    Capacity { needed: usize, budget: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn push_matchings(
    labels: &[usize],
    count: usize,
    prefix: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if count == 0 {
        out.push(prefix.clone());
        return;
    }
    if labels.len() < 2 * count {
        return;
    }
    for i in 0..labels.len() {
        if labels.len() - i < 2 * count {
            break;
        }
        for j in i + 1..labels.len() {
            let rest: Vec<usize> = labels[i + 1..]
                .iter()
                .copied()
                .filter(|&l| l != labels[j])
                .collect();
            prefix.push((labels[i], labels[j]));
            push_matchings(&rest, count - 1, prefix, out);
            prefix.pop();
        }
    }
}

fn check_pipes(m: usize) -> Result<(), MatrixError> {
    if m == 0 || m > flow::MAX_PIPES {
        return Err(MatrixError::Range(format!("pipe count {m} outside 1..={}", flow::MAX_PIPES)));
    }
    Ok(())
}

/// All Alice configurations with exactly `hoses` hoses and the tap connected,
/// in lexicographic order of their hose lists.
pub fn enumerate_alice(m: usize, hoses: usize) -> Result<Vec<Configuration>, MatrixError> {
    check_pipes(m)?;
    if hoses == 0 || hoses > m.div_ceil(2) {
        return Err(MatrixError::Range(format!(
            "Alice hose count {hoses} outside 1..={} for m={m}",
            m.div_ceil(2)
        )));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(hoses);
    for water_in in 1..=m {
        let rest: Vec<usize> = (1..=m).filter(|&p| p != water_in).collect();
        prefix.push((TAP, water_in));
        push_matchings(&rest, hoses - 1, &mut prefix, &mut out);
        prefix.pop();
    }
    out.into_iter()
        .map(|h| Configuration::new(Side::Alice, m, &h).map_err(Into::into))
        .collect()
}

/// All Bob configurations with exactly `hoses` hoses, lexicographic.
pub fn enumerate_bob(m: usize, hoses: usize) -> Result<Vec<Configuration>, MatrixError> {
    check_pipes(m)?;
    if hoses == 0 || hoses > (m.saturating_sub(1)) / 2 {
        return Err(MatrixError::Range(format!(
            "Bob hose count {hoses} outside 1..={} for m={m}",
            m.saturating_sub(1) / 2
        )));
    }
    let labels: Vec<usize> = (1..=m).collect();
    let mut out = Vec::new();
    push_matchings(&labels, hoses, &mut Vec::with_capacity(hoses), &mut out);
    out.into_iter()
        .map(|h| Configuration::new(Side::Bob, m, &h).map_err(Into::into))
        .collect()
}

/// Row-major bit table with 64-entry words.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn bytes_needed(rows: usize, cols: usize) -> usize {
        rows.saturating_mul(cols.div_ceil(64)).saturating_mul(8)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        BitMatrix { rows, cols, words_per_row, data: vec![0; rows * words_per_row] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.words_per_row + c / 64];
        if value {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// Column indices of the ones in row `r`, ascending.
    pub fn ones_in_row(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(r).iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Fills the table in parallel from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool + Sync) -> Self {
        let mut m = Self::zeros(rows, cols);
        let wpr = m.words_per_row;
        if wpr > 0 {
            m.data.par_chunks_mut(wpr).enumerate().for_each(|(r, words)| {
                for c in 0..cols {
                    if f(r, c) {
                        words[c / 64] |= 1 << (c % 64);
                    }
                }
            });
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.ones_in_row(r) {
                t.set(c, r, true);
            }
        }
        t
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitMatrix({}x{})", self.rows, self.cols)
    }
}

/// Rows are Alice configurations, columns Bob configurations, and each bit
/// says whether the water leaves on Alice's side.
#[derive(Debug, Clone)]
pub struct ConfigMatrix {
    pub m: usize,
    pub rows: Vec<Configuration>,
    pub cols: Vec<Configuration>,
    pub bits: BitMatrix,
}

impl ConfigMatrix {
    /// Simulates every entry. Rows must be Alice configurations with the tap
    /// connected and columns Bob configurations, all on `m` pipes.
    pub fn from_configurations(
        m: usize,
        rows: Vec<Configuration>,
        cols: Vec<Configuration>,
        memory_budget: usize,
    ) -> Result<Self, MatrixError> {
        let needed = BitMatrix::bytes_needed(rows.len(), cols.len());
        if needed > memory_budget {
            return Err(MatrixError::Capacity { needed, budget: memory_budget });
        }
        for a in &rows {
            if a.side() != Side::Alice {
                return Err(FlowError::WrongSide { expected: Side::Alice, got: a.side() }.into());
            }
            if a.pipes() != m {
                return Err(FlowError::PipeCountMismatch(m, a.pipes()).into());
            }
            flow::water_in(a)?;
        }
        for b in &cols {
            if b.side() != Side::Bob {
                return Err(FlowError::WrongSide { expected: Side::Bob, got: b.side() }.into());
            }
            if b.pipes() != m {
                return Err(FlowError::PipeCountMismatch(m, b.pipes()).into());
            }
        }
        let bits = BitMatrix::from_fn(rows.len(), cols.len(), |r, c| flow::trace_bit(&rows[r], &cols[c]));
        Ok(ConfigMatrix { m, rows, cols, bits })
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits.get(r, c)
    }

    /// Re-simulates every entry and reports the first mismatch with the stored bits.
    pub fn first_incoherent_entry(&self) -> Option<(usize, usize)> {
        (0..self.rows.len()).find_map(|r| {
            (0..self.cols.len())
                .find(|&c| flow::trace_bit(&self.rows[r], &self.cols[c]) != self.bits.get(r, c))
                .map(|c| (r, c))
        })
    }

    /// Plain-text export: header, row labels, column labels, then bit rows.
    pub fn export(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "m={} rows={} cols={}", self.m, self.rows.len(), self.cols.len());
        for c in self.rows.iter().chain(&self.cols) {
            let _ = writeln!(s, "{c}");
        }
        for r in 0..self.rows.len() {
            s.extend((0..self.cols.len()).map(|c| if self.bits.get(r, c) { '1' } else { '0' }));
            s.push('\n');
        }
        s
    }

    /// Reads the export format back. Bits are taken as stored, not re-simulated.
    pub fn import(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (_, header) = lines
            .next()
            .ok_or(MatrixError::Format { line: 1, message: "missing header".into() })?;
        let fields = parse_header(header, &["m", "rows", "cols"], 1)?;
        let (m, nrows, ncols) = (fields[0], fields[1], fields[2]);
        let mut read_configs = |side: Side, n: usize| -> Result<Vec<Configuration>, MatrixError> {
            (0..n)
                .map(|_| {
                    let (line, text) = lines.next().ok_or(MatrixError::Format {
                        line: 0,
                        message: "unexpected end of file in labels".into(),
                    })?;
                    Configuration::parse(side, m, text).map_err(|e| MatrixError::Format {
                        line,
                        message: e.to_string(),
                    })
                })
                .collect()
        };
        let rows = read_configs(Side::Alice, nrows)?;
        let cols = read_configs(Side::Bob, ncols)?;
        let mut bits = BitMatrix::zeros(nrows, ncols);
        for r in 0..nrows {
            let (line, text) = lines.next().ok_or(MatrixError::Format {
                line: 0,
                message: "unexpected end of file in bit rows".into(),
            })?;
            if text.chars().count() != ncols {
                return Err(MatrixError::Format {
                    line,
                    message: format!("expected {ncols} bits, found {}", text.chars().count()),
                });
            }
            for (c, ch) in text.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => bits.set(r, c, true),
                    _ => {
                        return Err(MatrixError::Format {
                            line,
                            message: format!("column {}: `{ch}` is not a bit", c + 1),
                        })
                    }
                }
            }
        }
        Ok(ConfigMatrix { m, rows, cols, bits })
    }
}

/// Parses `key=value` headers with the given keys in order.
pub(crate) fn parse_header(text: &str, keys: &[&str], line: usize) -> Result<Vec<usize>, MatrixError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != keys.len() {
        return Err(MatrixError::Format {
            line,
            message: format!("expected header `{}`", keys.iter().map(|k| format!("{k}=<int>")).collect::<Vec<_>>().join(" ")),
        });
    }
    keys.iter()
        .zip(parts)
        .map(|(key, part)| {
            part.strip_prefix(key)
                .and_then(|p| p.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| MatrixError::Format { line, message: format!("expected `{key}=<int>`, got `{part}`") })
        })
        .collect()
}

fn normalized_counts(counts: &[usize]) -> Vec<usize> {
    let mut v = counts.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Builds the union of the blocks with the requested hose counts, blocks in
/// ascending hose count.
pub fn build_matrix(
    m: usize,
    alice_hose_counts: &[usize],
    bob_hose_counts: &[usize],
    memory_budget: usize,
) -> Result<ConfigMatrix, MatrixError> {
    let mut rows = Vec::new();
    for h in normalized_counts(alice_hose_counts) {
        rows.extend(enumerate_alice(m, h)?);
    }
    let mut cols = Vec::new();
    for h in normalized_counts(bob_hose_counts) {
        cols.extend(enumerate_bob(m, h)?);
    }
    ConfigMatrix::from_configurations(m, rows, cols, memory_budget)
}

/// Every block: all Alice and Bob hose counts allowed for `m`.
pub fn build_full_matrix(m: usize, memory_budget: usize) -> Result<ConfigMatrix, MatrixError> {
    let alice: Vec<usize> = (1..=m.div_ceil(2)).collect();
    let bob: Vec<usize> = (1..=m.saturating_sub(1) / 2).collect();
    build_matrix(m, &alice, &bob, memory_budget)
}
