use std::fmt;

use serde::Serialize;

use super::{from_cycles, parse_cycles, GroupError, GroupSpec, Permutation};

/// The W₃ conjugator exactly as printed; its third cycle repeats the point 2.
pub const W3_CONJUGATOR_LITERAL: &str = "(3,17,4,15)(6,24,20,11)(2,28,18,5,26,22,14,2)(7,21,13,8,25,23,19,10,16)";

const W2_GENERATORS: [&str; 3] = ["(3,5,10)", "(2,7,8)", "(1,2,3)(4,7,10)(5,6,8)"];

/// K on 27 points: the printed generators, with the elided top-level
/// product written out.
const K_GENERATORS: [&str; 9] = [
    "(1,2,3)",
    "(4,5,6)",
    "(1,4,7)(2,5,8)(3,6,9)",
    "(10,11,12)",
    "(13,14,15)",
    "(10,13,16)(11,14,17)(12,15,18)",
    "(19,20,21)",
    "(22,23,24)",
    "(19,22,25)(20,23,26)(21,24,27)",
];

/// `(i, i+s, i+2s)` for `i = 1..=s`.
fn block_product(s: usize) -> Vec<Vec<usize>> {
    (1..=s).map(|i| vec![i, i + s, i + 2 * s]).collect()
}

/// Generators of `C₃ ≀ ⋯ ≀ C₃` (`levels` factors) on `3^levels` points:
/// three shifted copies of the previous level plus the product permuting
/// the three blocks.
pub fn wreath_generators(levels: u32) -> Result<GroupSpec, GroupError> {
    if !(1..=5).contains(&levels) {
        return Err(GroupError::Range(format!("levels={levels} outside 1..=5")));
    }
    let mut gens: Vec<Vec<Vec<usize>>> = vec![vec![vec![1, 2, 3]]];
    let mut size = 3;
    for _ in 1..levels {
        let mut next = Vec::new();
        for shift in [0, size, 2 * size] {
            next.extend(
                gens.iter().map(|g| g.iter().map(|c| c.iter().map(|p| p + shift).collect()).collect::<Vec<Vec<usize>>>()),
            );
        }
        next.push(block_product(size));
        gens = next;
        size *= 3;
    }
    let generators = gens.iter().map(|g| from_cycles(size, g)).collect::<Result<Vec<_>, _>>()?;
    GroupSpec::new(size, generators, None)
}

pub fn builtin_w2() -> GroupSpec {
    let generators = W2_GENERATORS.iter().map(|g| parse_cycles(g, 10).expect("valid literal")).collect();
    GroupSpec::new(10, generators, None).expect("consistent degree")
}

fn k_generators() -> Vec<Permutation> {
    let mut gens: Vec<Permutation> =
        K_GENERATORS.iter().map(|g| parse_cycles(g, 28).expect("valid literal")).collect();
    gens.push(from_cycles(28, &block_product(9)).expect("valid product"));
    gens
}

/// How `g⁻¹ K g` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// Right-to-left composition: elements `g⁻¹ ∘ k ∘ g`.
    Functional,
    /// Left-to-right composition (permutations acting on the right), which
    /// is `g ∘ k ∘ g⁻¹` in right-to-left terms.
    RightAction,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Functional => "functional",
            Convention::RightAction => "right-action",
        })
    }
}

/// One interpretation of the printed W₃ conjugator.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugatorReading {
    pub description: String,
    /// The conjugator's cycles, as read.
    pub conjugator: Permutation,
    pub convention: Convention,
    pub spec: GroupSpec,
}

fn reading(description: String, cycles: &[Vec<usize>], convention: Convention) -> Option<ConjugatorReading> {
    let conjugator = from_cycles(28, cycles).ok()?;
    let effective = match convention {
        Convention::Functional => conjugator.clone(),
        Convention::RightAction => conjugator.inverse(),
    };
    let spec = GroupSpec::new(28, k_generators(), Some(effective)).ok()?;
    Some(ConjugatorReading { description, conjugator, convention, spec })
}

/// Candidate readings of the printed conjugator, most plausible first.
///
/// Every single-point deletion from the repeated cycle that leaves it
/// duplicate-free is tried; these collapse to dropping the trailing 2. If
/// `repairs` is set, two bounded families follow: either copy of the repeated
/// 2 replaced by a point the conjugator leaves fixed (1, 9, 12, 27), and each
/// single-point deletion from the 7-cycle. Each cycle is tried under both
/// composition conventions.
pub fn w3_conjugator_readings(repairs: bool) -> Vec<ConjugatorReading> {
    let literal = super::parse_cycle_lists(W3_CONJUGATOR_LITERAL).expect("literal parses");
    let broken = 2;
    let mut seen: Vec<Permutation> = Vec::new();
    let mut out = Vec::new();
    let mut push = |label: String, cycles: Vec<Vec<usize>>, out: &mut Vec<ConjugatorReading>| {
        let Ok(p) = from_cycles(28, &cycles) else { return };
        if seen.contains(&p) {
            return;
        }
        for convention in [Convention::RightAction, Convention::Functional] {
            if let Some(r) = reading(format!("{label}, {convention}"), &cycles, convention) {
                out.push(r);
            }
        }
        seen.push(p);
    };
    for drop in (0..literal[broken].len()).rev() {
        let mut cycles = literal.clone();
        let removed = cycles[broken].remove(drop);
        push(format!("drop {removed} at position {} of the repeated cycle", drop + 1), cycles, &mut out);
    }
    if repairs {
        let moved: Vec<usize> = literal.iter().flatten().copied().collect();
        let unmoved: Vec<usize> = (1..=28).filter(|p| !moved.contains(p)).collect();
        let last = literal[broken].len() - 1;
        for pos in [last, 0] {
            for &x in &unmoved {
                let mut cycles = literal.clone();
                cycles[broken][pos] = x;
                push(format!("repair: replace the 2 at position {} by {x}", pos + 1), cycles, &mut out);
            }
        }
        let mut seven = literal[broken].clone();
        seven.pop();
        for drop in 0..seven.len() {
            let mut cycles = literal.clone();
            let mut c = seven.clone();
            let removed = c.remove(drop);
            cycles[broken] = c;
            push(format!("repair: also drop {removed}"), cycles, &mut out);
        }
    }
    out
}

/// W₃ under the primary reading of its conjugator.
pub fn builtin_w3() -> GroupSpec {
    w3_conjugator_readings(false).remove(0).spec
}
