//! Equality protocols as families of configuration pairs.

use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::flow::{self, Configuration, FlowError, Side};
use crate::matrix::{parse_header, MatrixError};

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("solution does not verify: {0}")]
    NotVerified(Violation),
    #[error("pipe count {0} is odd")]
    OddPipeCount(usize),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

impl From<MatrixError> for SolutionError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Format { line, message } => SolutionError::Format { line, message },
            MatrixError::Flow(f) => SolutionError::Flow(f),
            other => SolutionError::Format { line: 0, message: other.to_string() },
        }
    }
}

/// An entry of the pair grid that breaks the permutation property.
/// Indices are 0-based positions in the pair list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub col: usize,
    pub expected: u8,
    pub got: u8,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "entry (A[{}], B[{}]) is {} but should be {}",
            self.row, self.col, self.got, self.expected
        )
    }
}

/// Pairs `(A(x), B(x))` that should satisfy `entry(A(x), B(y)) = [x == y]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub m: usize,
    pub pairs: Vec<(Configuration, Configuration)>,
}

impl Solution {
    pub fn new(m: usize, pairs: Vec<(Configuration, Configuration)>) -> Result<Self, FlowError> {
        for (a, b) in &pairs {
            for c in [a, b] {
                if c.pipes() != m {
                    return Err(FlowError::PipeCountMismatch(m, c.pipes()));
                }
            }
            if a.side() != Side::Alice {
                return Err(FlowError::WrongSide { expected: Side::Alice, got: a.side() });
            }
            if b.side() != Side::Bob {
                return Err(FlowError::WrongSide { expected: Side::Bob, got: b.side() });
            }
            flow::water_in(a)?;
        }
        Ok(Solution { m, pairs })
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn alice(&self) -> impl Iterator<Item = &Configuration> {
        self.pairs.iter().map(|(a, _)| a)
    }

    pub fn bob(&self) -> impl Iterator<Item = &Configuration> {
        self.pairs.iter().map(|(_, b)| b)
    }

    /// `m=<m> k=<k>` followed by one `A=<config> B=<config>` line per pair.
    pub fn to_text(&self) -> String {
        let mut s = format!("m={} k={}\n", self.m, self.k());
        for (a, b) in &self.pairs {
            let _ = writeln!(s, "A={a} B={b}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, SolutionError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or(SolutionError::Format { line: 1, message: "missing `m=<int> k=<int>` header".into() })?;
        let fields = parse_header(header, &["m", "k"], hline)?;
        let (m, k) = (fields[0], fields[1]);
        let mut pairs = Vec::with_capacity(k);
        for (line, text) in lines {
            let (a, b) = parse_pair_line(m, text).map_err(|message| SolutionError::Format { line, message })?;
            pairs.push((a, b));
        }
        if pairs.len() != k {
            return Err(SolutionError::Format {
                line: hline,
                message: format!("header says k={k} but {} pairs follow", pairs.len()),
            });
        }
        Solution::new(m, pairs).map_err(Into::into)
    }
}

/// Parses `A=<config> B=<config>`.
pub fn parse_pair_line(m: usize, text: &str) -> Result<(Configuration, Configuration), String> {
    let rest = text.trim().strip_prefix("A=").ok_or("expected `A=<config> B=<config>`")?;
    let split = rest.find("B=").ok_or("missing `B=`")?;
    let a = Configuration::parse(Side::Alice, m, &rest[..split]).map_err(|e| format!("A: {e}"))?;
    let b = Configuration::parse(Side::Bob, m, &rest[split + 2..]).map_err(|e| format!("B: {e}"))?;
    Ok((a, b))
}

/// Checks all `k²` entries by simulation and returns the first violation in
/// row-major order.
pub fn verify_solution(s: &Solution) -> Result<(), Violation> {
    let check_row = |i: usize| {
        let a = &s.pairs[i].0;
        s.pairs.iter().enumerate().find_map(|(j, (_, b))| {
            let expected = u8::from(i == j);
            let got = u8::from(flow::trace_bit(a, b));
            (got != expected).then_some(Violation { row: i, col: j, expected, got })
        })
    };
    let first = if s.k() >= 64 {
        (0..s.k()).into_par_iter().find_map_first(check_row)
    } else {
        (0..s.k()).find_map(check_row)
    };
    first.map_or(Ok(()), Err)
}

/// Completes each Alice configuration to `m/2` hoses, leaving only its
/// water-out pipe open. Unused pipes are paired in ascending label order.
pub fn lift_to_last_row_block(s: &Solution) -> Result<Solution, SolutionError> {
    if !s.m.is_multiple_of(2) {
        return Err(SolutionError::OddPipeCount(s.m));
    }
    verify_solution(s).map_err(SolutionError::NotVerified)?;
    let mut pairs = Vec::with_capacity(s.k());
    for (a, b) in &s.pairs {
        let out = flow::water_out(a, b)?;
        let free: Vec<usize> = a.open_pipes().into_iter().filter(|&p| p != out).collect();
        let mut lifted = a.clone();
        for pair in free.chunks_exact(2) {
            lifted.add_hose(pair[0], pair[1])?;
        }
        pairs.push((lifted, b.clone()));
    }
    Ok(Solution::new(s.m, pairs)?)
}

/// Finds a pair `(y, y')`, `y != y'`, with `cols[y] ⊆ cols[y']`.
pub fn antichain_check(cols: &[Configuration]) -> Result<(), (usize, usize)> {
    for (y, small) in cols.iter().enumerate() {
        for (y2, big) in cols.iter().enumerate() {
            if y != y2 && small.is_subset_of(big) {
                return Err((y, y2));
            }
        }
    }
    Ok(())
}
