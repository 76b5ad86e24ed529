//! Permutation groups acting on a base construction.
//!
//! A group `G ≤ S_m` moves an accepting base pair `(A(e), B(e))` to
//! `(A(g), B(g)) = (g·A(e), g·B(e))`. Since relabelling every pipe on both
//! sides does not change where the water goes,
//! `entry(A(g), B(h)) = entry(A(e), B(g⁻¹h))`, so checking the orbit family
//! needs only `|G|` simulations.

mod action;
mod classify;
mod perm;
mod wreath;

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::flow::FlowError;

pub use action::{act, standard_base, BasePair};
pub use classify::{
    classify, classify_group, extract_solution, spot_check, Classification, ClassifyOptions, GHGroupReport, GroupViolation,
    SpotCheck, Witness,
};
pub use perm::{from_cycles, parse_cycle_lists, parse_cycles, Permutation};
pub use wreath::{
    builtin_w2, builtin_w3, w3_conjugator_readings, wreath_generators, ConjugatorReading, Convention,
    W3_CONJUGATOR_LITERAL,
};

/// Default ceiling on generated group orders.
pub const DEFAULT_MAX_ORDER: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("point {0} appears more than once")]
    RepeatedPoint(usize),
    #[error("point {point} outside 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("images do not form a bijection")]
    NotBijection,
    #[error("{0}")]
    Degree(String),
    #[error("permutation of degree {got} used with {expected} pipes")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("group order exceeds the cap of {cap}")]
    OrderExceedsCap { cap: usize },
    #[error("{0}")]
    Range(String),
    #[error("invalid base construction: {0}")]
    InvalidBase(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("group of order {order} fails the strict check ({strict_failure}); the weak check is limited to order {threshold}")]
    WeakCheckTooLarge { order: usize, threshold: usize, strict_failure: String },
    #[error("not a garden hose permutation group: {0}")]
    NotGH(GroupViolation),
    #[error("line {line}: {message}")]
    File { line: usize, message: String },
}

/// Generators of a permutation group, optionally conjugated: the group is
/// `c⁻¹ ⟨generators⟩ c` with `c` the conjugator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSpec {
    pub degree: usize,
    pub generators: Vec<Permutation>,
    pub conjugator: Option<Permutation>,
}

impl GroupSpec {
    pub fn new(degree: usize, generators: Vec<Permutation>, conjugator: Option<Permutation>) -> Result<Self, GroupError> {
        for g in generators.iter().chain(conjugator.iter()) {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch { expected: degree, got: g.degree() });
            }
        }
        Ok(GroupSpec { degree, generators, conjugator })
    }

    /// The generators after conjugation.
    pub fn effective_generators(&self) -> Vec<Permutation> {
        match &self.conjugator {
            Some(c) => self.generators.iter().map(|g| g.conjugate_by(c)).collect(),
            None => self.generators.clone(),
        }
    }

    /// Same group on more points; the new points are fixed.
    pub fn extend_to(&self, degree: usize) -> Result<Self, GroupError> {
        let generators = self.generators.iter().map(|g| g.extend_to(degree)).collect::<Result<_, _>>()?;
        let conjugator = self.conjugator.as_ref().map(|c| c.extend_to(degree)).transpose()?;
        Ok(GroupSpec { degree, generators, conjugator })
    }

    /// Generator file: one permutation per line in cycle notation, with
    /// optional `degree: <n>` and `conjugator: <cycles>` lines. `#` starts a
    /// comment. Without a degree, the largest point mentioned is used.
    pub fn from_text(text: &str, degree: Option<usize>) -> Result<Self, GroupError> {
        let mut file_degree = None;
        let mut gens: Vec<(usize, Vec<Vec<usize>>)> = Vec::new();
        let mut conj: Option<(usize, Vec<Vec<usize>>)> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let wrap = |e: GroupError| GroupError::File { line, message: e.to_string() };
            if let Some(rest) = content.strip_prefix("degree:") {
                file_degree = Some(rest.trim().parse::<usize>().map_err(|_| GroupError::File {
                    line,
                    message: format!("`{}` is not a degree", rest.trim()),
                })?);
            } else if let Some(rest) = content.strip_prefix("conjugator:") {
                conj = Some((line, parse_cycle_lists(rest).map_err(wrap)?));
            } else {
                gens.push((line, parse_cycle_lists(content).map_err(wrap)?));
            }
        }
        let max_point = gens
            .iter()
            .chain(conj.iter())
            .flat_map(|(_, cs)| cs.iter().flatten())
            .copied()
            .max()
            .unwrap_or(1);
        let degree = degree.or(file_degree).unwrap_or(max_point);
        let build = |(line, cycles): &(usize, Vec<Vec<usize>>)| {
            from_cycles(degree, cycles).map_err(|e| GroupError::File { line: *line, message: e.to_string() })
        };
        let generators = gens.iter().map(build).collect::<Result<Vec<_>, _>>()?;
        let conjugator = conj.as_ref().map(build).transpose()?;
        GroupSpec::new(degree, generators, conjugator)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("degree: {}\n", self.degree);
        for g in &self.generators {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        if let Some(c) = &self.conjugator {
            s.push_str(&format!("conjugator: {c}\n"));
        }
        s
    }
}

/// All elements of a group, stored as one flat image table. Element 0 is
/// the identity; the rest follow breadth-first discovery order.
#[derive(Clone)]
pub struct Group {
    degree: usize,
    data: Vec<u8>,
}

impl Group {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.data.len().checked_div(self.degree).unwrap_or(1)
    }

    pub fn raw(&self, i: usize) -> &[u8] {
        &self.data[i * self.degree..(i + 1) * self.degree]
    }

    pub fn element(&self, i: usize) -> Permutation {
        Permutation::from_raw(self.raw(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Permutation> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        (0..self.order()).any(|i| self.raw(i) == p.raw())
    }
}

impl std::fmt::Debug for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Group(degree={}, order={})", self.degree, self.order())
    }
}

/// Breadth-first closure: each discovered element `e` yields `s ∘ e` for
/// every generator `s`, in generator order.
pub fn generate_group(spec: &GroupSpec, max_order: usize) -> Result<Group, GroupError> {
    let gens = spec.effective_generators();
    let degree = spec.degree;
    let identity = Permutation::identity(degree);
    let mut seen: HashSet<Box<[u8]>> = HashSet::new();
    seen.insert(identity.raw().into());
    let mut data = identity.raw().to_vec();
    let mut next = vec![0u8; degree];
    let mut i = 0;
    while i * degree < data.len() {
        for s in &gens {
            let s = s.raw();
            for (slot, &p) in next.iter_mut().zip(&data[i * degree..(i + 1) * degree]) {
                *slot = s[p as usize];
            }
            if !seen.contains(next.as_slice()) {
                if seen.len() >= max_order {
                    return Err(GroupError::OrderExceedsCap { cap: max_order });
                }
                seen.insert(next.clone().into_boxed_slice());
                data.extend_from_slice(&next);
            }
        }
        i += 1;
        if degree == 0 {
            break;
        }
    }
    Ok(Group { degree, data })
}
