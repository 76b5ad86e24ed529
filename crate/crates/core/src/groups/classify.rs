use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{generate_group, BasePair, Group, GroupError, GroupSpec, Permutation, DEFAULT_MAX_ORDER};
use crate::flow::{trace_bit, Configuration};
use crate::matrix::BitMatrix;
use crate::solution::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Strict,
    Weak,
    #[serde(rename = "NotGH")]
    NotGH,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Strict => "Strict",
            Classification::Weak => "Weak",
            Classification::NotGH => "NotGH",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassifyOptions {
    pub max_order: usize,
    /// Largest order for which the full `|G|²` matrix is built.
    pub weak_threshold: usize,
    /// Largest order for which a strict witness is materialised.
    pub witness_limit: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { max_order: DEFAULT_MAX_ORDER, weak_threshold: 10_000, witness_limit: 10_000 }
    }
}

/// Why a family is not (strictly) a permutation submatrix. Elements are
/// shown as permutations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GroupViolation {
    /// `entry(A(e), B(u))` differs from `[u = e]`.
    ReducedEntry { element: Permutation, expected: u8, got: u8 },
    DuplicateAlice { first: Permutation, second: Permutation },
    DuplicateBob { first: Permutation, second: Permutation },
    /// After merging repeated rows and columns, a row class has no one.
    RowWithoutOne { row: Permutation },
    RowWithSeveralOnes { row: Permutation, cols: (Permutation, Permutation) },
    ColumnWithoutOne { col: Permutation },
    ColumnWithSeveralOnes { col: Permutation, rows: (Permutation, Permutation) },
}

impl fmt::Display for GroupViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GroupViolation::*;
        match self {
            ReducedEntry { element, expected, got } => {
                write!(f, "entry(A(e), B({element})) = {got}, expected {expected}")
            }
            DuplicateAlice { first, second } => write!(f, "A({first}) = A({second})"),
            DuplicateBob { first, second } => write!(f, "B({first}) = B({second})"),
            RowWithoutOne { row } => write!(f, "row A({row}) has no one"),
            RowWithSeveralOnes { row, cols } => {
                write!(f, "row A({row}) has ones at B({}) and B({})", cols.0, cols.1)
            }
            ColumnWithoutOne { col } => write!(f, "column B({col}) has no one"),
            ColumnWithSeveralOnes { col, rows } => {
                write!(f, "column B({col}) has ones at A({}) and A({})", rows.0, rows.1)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub enum Witness {
    Solution(Solution),
    /// Strict verdict from `simulations` reduced checks; the pair family is
    /// too large to materialise.
    ReducedCertificate { simulations: usize },
    Violation(GroupViolation),
}

#[derive(Debug, Clone, Serialize)]
pub struct GHGroupReport {
    pub m: usize,
    pub t: usize,
    pub classification: Classification,
    pub group_order: usize,
    pub solution_size: usize,
    /// `m / log2(size)`; absent when the size is below 2.
    pub implied_ratio: Option<f64>,
    pub witness: Witness,
    /// Set for weak and non-groups: the reason the strict check failed.
    pub strict_failure: Option<GroupViolation>,
}

fn ratio(m: usize, size: usize) -> Option<f64> {
    (size >= 2).then(|| m as f64 / (size as f64).log2())
}

fn first_duplicate(keys: &[u8], width: usize, n: usize) -> Option<(usize, usize)> {
    let key = |i: usize| &keys[i * width..(i + 1) * width];
    let mut idx: Vec<u32> = (0..n as u32).collect();
    idx.par_sort_unstable_by(|&a, &b| key(a as usize).cmp(key(b as usize)).then(a.cmp(&b)));
    idx.windows(2)
        .filter(|w| key(w[0] as usize) == key(w[1] as usize))
        .map(|w| (w[0] as usize, w[1] as usize))
        .min()
}

fn orbit_keys(group: &Group, c: &Configuration) -> Vec<u8> {
    let width = c.key().len();
    let mut keys = vec![0u8; group.order() * width];
    keys.par_chunks_mut(width)
        .enumerate()
        .for_each(|(i, slot)| slot.copy_from_slice(c.permuted(group.raw(i)).key()));
    keys
}

/// The `O(|G|)` check: `entry(A(e), B(u)) = [u = e]` for every `u`, and the
/// orbit rows and columns are pairwise distinct.
fn strict_check(group: &Group, base: &BasePair) -> Result<(), GroupViolation> {
    let n = group.order();
    let bad = (0..n).into_par_iter().find_map_first(|u| {
        let b = base.bob.permuted(group.raw(u));
        let got = u8::from(trace_bit(&base.alice, &b));
        let expected = u8::from(u == 0);
        (got != expected).then(|| GroupViolation::ReducedEntry { element: group.element(u), expected, got })
    });
    if let Some(v) = bad {
        return Err(v);
    }
    let width = base.m + 1;
    if let Some((i, j)) = first_duplicate(&orbit_keys(group, &base.alice), width, n) {
        return Err(GroupViolation::DuplicateAlice { first: group.element(i), second: group.element(j) });
    }
    if let Some((i, j)) = first_duplicate(&orbit_keys(group, &base.bob), width, n) {
        return Err(GroupViolation::DuplicateBob { first: group.element(i), second: group.element(j) });
    }
    Ok(())
}

/// Merges repeated rows and columns of the full orbit matrix. Each class is
/// represented by its smallest configuration.
fn weak_check(group: &Group, base: &BasePair) -> Result<Solution, GroupViolation> {
    let n = group.order();
    let rows: Vec<Configuration> = (0..n).map(|i| base.alice.permuted(group.raw(i))).collect();
    let cols: Vec<Configuration> = (0..n).map(|i| base.bob.permuted(group.raw(i))).collect();
    let bits = BitMatrix::from_fn(n, n, |i, j| trace_bit(&rows[i], &cols[j]));
    let by_col = bits.transpose();

    let classes = |m: &BitMatrix, configs: &[Configuration]| -> Vec<usize> {
        let mut rep: HashMap<&[u64], usize> = HashMap::new();
        let mut order = Vec::new();
        for i in 0..n {
            match rep.get_mut(m.row_words(i)) {
                Some(r) => {
                    if configs[i] < configs[*r] {
                        *r = i;
                    }
                }
                None => {
                    rep.insert(m.row_words(i), i);
                    order.push(i);
                }
            }
        }
        order.iter().map(|&first| rep[m.row_words(first)]).collect()
    };
    let row_reps = classes(&bits, &rows);
    let col_reps = classes(&by_col, &cols);

    let mut pairs = Vec::with_capacity(row_reps.len());
    for &r in &row_reps {
        let ones: Vec<usize> = col_reps.iter().copied().filter(|&c| bits.get(r, c)).collect();
        match ones.as_slice() {
            [] => return Err(GroupViolation::RowWithoutOne { row: group.element(r) }),
            [c] => pairs.push((rows[r].clone(), cols[*c].clone())),
            [c1, c2, ..] => {
                return Err(GroupViolation::RowWithSeveralOnes {
                    row: group.element(r),
                    cols: (group.element(*c1), group.element(*c2)),
                })
            }
        }
    }
    for &c in &col_reps {
        let ones: Vec<usize> = row_reps.iter().copied().filter(|&r| bits.get(r, c)).collect();
        match ones.as_slice() {
            [] => return Err(GroupViolation::ColumnWithoutOne { col: group.element(c) }),
            [_] => {}
            [r1, r2, ..] => {
                return Err(GroupViolation::ColumnWithSeveralOnes {
                    col: group.element(c),
                    rows: (group.element(*r1), group.element(*r2)),
                })
            }
        }
    }
    pairs.sort();
    Ok(Solution::new(base.m, pairs).expect("orbit configurations are valid"))
}

fn orbit_solution(group: &Group, base: &BasePair) -> Solution {
    let pairs = (0..group.order())
        .map(|i| (base.alice.permuted(group.raw(i)), base.bob.permuted(group.raw(i))))
        .collect();
    Solution::new(base.m, pairs).expect("orbit configurations are valid")
}

/// Classifies an already generated group.
pub fn classify_group(group: &Group, base: &BasePair, opts: &ClassifyOptions) -> Result<GHGroupReport, GroupError> {
    if group.degree() != base.m {
        return Err(GroupError::DegreeMismatch { expected: base.m, got: group.degree() });
    }
    let n = group.order();
    let report = |classification, size, witness, strict_failure| GHGroupReport {
        m: base.m,
        t: base.t,
        classification,
        group_order: n,
        solution_size: size,
        implied_ratio: ratio(base.m, size),
        witness,
        strict_failure,
    };
    let strict_failure = match strict_check(group, base) {
        Ok(()) => {
            let witness = if n <= opts.witness_limit {
                Witness::Solution(orbit_solution(group, base))
            } else {
                Witness::ReducedCertificate { simulations: n }
            };
            return Ok(report(Classification::Strict, n, witness, None));
        }
        Err(v) => v,
    };
    if n > opts.weak_threshold {
        return Err(GroupError::WeakCheckTooLarge {
            order: n,
            threshold: opts.weak_threshold,
            strict_failure: strict_failure.to_string(),
        });
    }
    Ok(match weak_check(group, base) {
        Ok(s) => report(Classification::Weak, s.k(), Witness::Solution(s), Some(strict_failure)),
        Err(v) => report(Classification::NotGH, 0, Witness::Violation(v), Some(strict_failure)),
    })
}

/// Generates the group and decides whether its orbit of `base` is a
/// permutation submatrix (strict), becomes one after merging repeated rows
/// and columns (weak), or neither.
pub fn classify(spec: &GroupSpec, base: &BasePair, opts: &ClassifyOptions) -> Result<GHGroupReport, GroupError> {
    if spec.degree != base.m {
        return Err(GroupError::DegreeMismatch { expected: base.m, got: spec.degree });
    }
    let group = generate_group(spec, opts.max_order)?;
    classify_group(&group, base, opts)
}

/// The (deduplicated) group-invariant solution.
pub fn extract_solution(spec: &GroupSpec, base: &BasePair, opts: &ClassifyOptions) -> Result<Solution, GroupError> {
    if spec.degree != base.m {
        return Err(GroupError::DegreeMismatch { expected: base.m, got: spec.degree });
    }
    let group = generate_group(spec, opts.max_order)?;
    let report = classify_group(&group, base, opts)?;
    match report.witness {
        Witness::Solution(s) => Ok(s),
        Witness::ReducedCertificate { .. } => Ok(orbit_solution(&group, base)),
        Witness::Violation(v) => Err(GroupError::NotGH(v)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpotCheck {
    pub diagonal_checked: usize,
    pub off_diagonal_checked: usize,
    pub failures: Vec<(Permutation, Permutation)>,
}

/// Direct simulation of `entry(A(g), B(h))` without the left-invariance
/// shortcut: every diagonal pair plus `samples` random off-diagonal pairs.
pub fn spot_check(group: &Group, base: &BasePair, samples: usize, seed: u64) -> SpotCheck {
    let n = group.order();
    let pair = |i: usize| (base.alice.permuted(group.raw(i)), base.bob.permuted(group.raw(i)));
    let mut failures: Vec<(Permutation, Permutation)> = (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let (a, b) = pair(i);
            (!trace_bit(&a, &b)).then(|| (group.element(i), group.element(i)))
        })
        .collect();
    let mut off = 0;
    if n >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let g = rng.gen_range(0..n);
            let mut h = rng.gen_range(0..n - 1);
            if h >= g {
                h += 1;
            }
            let a = base.alice.permuted(group.raw(g));
            let b = base.bob.permuted(group.raw(h));
            if trace_bit(&a, &b) {
                failures.push((group.element(g), group.element(h)));
            }
            off += 1;
        }
    }
    SpotCheck { diagonal_checked: n, off_diagonal_checked: off, failures }
}
