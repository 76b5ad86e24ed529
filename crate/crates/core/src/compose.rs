//! Block product of solutions and the `m / log2 k` bound calculator.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::flow::{self, Configuration, FlowError, Side, TAP};
use crate::solution::{verify_solution, Solution, Violation};

/// Default cap on the number of pairs a composition may materialise.
pub const DEFAULT_COMPOSE_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("composition would have {k}^{t} pairs, over the cap of {cap}")]
    SizeCap { k: usize, t: u32, cap: usize },
    #[error("input solution does not verify: {0}")]
    NotVerified(Violation),
    #[error("block count t must be at least 1")]
    ZeroBlocks,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{0}")]
    Domain(String),
}

/// `k^t` pairs on `m * t` pipes. Index vectors `x` run in lexicographic order
/// with block 0 most significant. Block `i` holds pipes `i*m+1 ..= i*m+m`;
/// Alice's tap feeds the water-in pipe of block 0 and each block's water-out
/// pipe feeds the next block's water-in pipe.
pub fn compose(s: &Solution, t: u32, cap: usize) -> Result<Solution, ComposeError> {
    if t == 0 {
        return Err(ComposeError::ZeroBlocks);
    }
    verify_solution(s).map_err(ComposeError::NotVerified)?;
    let k = s.k();
    let size = (k as u128).checked_pow(t).filter(|&n| n <= cap as u128);
    let size = size.ok_or(ComposeError::SizeCap { k, t, cap })? as usize;
    let (m, blocks) = (s.m, t as usize);
    let total = m * blocks;
    if total > flow::MAX_PIPES {
        return Err(ComposeError::Domain(format!("{total} pipes exceeds the supported maximum {}", flow::MAX_PIPES)));
    }

    let water_in: Vec<usize> = s.alice().map(flow::water_in).collect::<Result<_, _>>()?;
    let water_out: Vec<usize> = s.pairs.iter().map(|(a, b)| flow::water_out(a, b)).collect::<Result<_, _>>()?;

    let mut pairs = Vec::with_capacity(size);
    let mut index = vec![0usize; blocks];
    for _ in 0..size {
        let mut alice = Configuration::empty(Side::Alice, total)?;
        let mut bob = Configuration::empty(Side::Bob, total)?;
        for (block, &x) in index.iter().enumerate() {
            let offset = block * m;
            let (a, b) = &s.pairs[x];
            for (p, q) in a.shifted_hoses(offset) {
                alice.add_hose(p, q)?;
            }
            for (p, q) in b.shifted_hoses(offset) {
                bob.add_hose(p, q)?;
            }
            if block == 0 {
                alice.add_hose(TAP, water_in[x])?;
            } else {
                let prev = index[block - 1];
                alice.add_hose(offset - m + water_out[prev], offset + water_in[x])?;
            }
        }
        pairs.push((alice, bob));
        for slot in index.iter_mut().rev() {
            *slot += 1;
            if *slot < k {
                break;
            }
            *slot = 0;
        }
    }
    Ok(Solution::new(total, pairs)?)
}

/// A positive integer written either plainly or as `base^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PowerOf {
    pub base: u64,
    pub exp: u32,
}

impl PowerOf {
    pub fn value(v: u64) -> Self {
        PowerOf { base: v, exp: 1 }
    }

    pub fn log2(&self) -> f64 {
        self.exp as f64 * (self.base as f64).log2()
    }

    pub fn checked_value(&self) -> Option<u64> {
        self.base.checked_pow(self.exp)
    }

    fn is_at_least_two(&self) -> bool {
        self.exp >= 1 && self.base >= 2
    }
}

impl fmt::Display for PowerOf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 1 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}^{}", self.base, self.exp)
        }
    }
}

impl FromStr for PowerOf {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || format!("`{s}` is not an integer or `base^exp`");
        match s.split_once('^') {
            Some((b, e)) => Ok(PowerOf {
                base: b.trim().parse().map_err(|_| bad())?,
                exp: e.trim().parse().map_err(|_| bad())?,
            }),
            None => Ok(PowerOf::value(s.parse().map_err(|_| bad())?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub m: u64,
    pub k: PowerOf,
    /// Coefficient of `n` in `GH(EQ_n) <= ratio * n + O(1)`.
    pub ratio: f64,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} k={} ratio={:.6}", self.m, self.k, self.ratio)
    }
}

/// `m / log2(k)`.
pub fn bound(m: u64, k: PowerOf) -> Result<BoundReport, ComposeError> {
    if m == 0 {
        return Err(ComposeError::Domain("m must be at least 1".into()));
    }
    if !k.is_at_least_two() {
        return Err(ComposeError::Domain(format!("k={k} must be at least 2")));
    }
    Ok(BoundReport { m, k, ratio: m as f64 / k.log2() })
}

/// Bound implied by a `C3 wr ... wr C3` (`levels` factors) group acting on
/// `3^levels + 1` pipes, whose order is `3^((3^levels - 1) / 2)`.
pub fn wreath_family_bound(levels: u32) -> Result<BoundReport, ComposeError> {
    if levels == 0 {
        return Err(ComposeError::Domain("levels must be at least 1".into()));
    }
    let points = 3u64
        .checked_pow(levels)
        .ok_or_else(|| ComposeError::Domain(format!("3^{levels} overflows")))?;
    let exp = u32::try_from((points - 1) / 2).map_err(|_| ComposeError::Domain("exponent overflows".into()))?;
    bound(points + 1, PowerOf { base: 3, exp })
}
