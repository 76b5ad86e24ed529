//! Exhaustive maximum permutation submatrix, for small matrices.
//!
//! A permutation submatrix is a clique in the graph whose vertices are the
//! one-entries `(r, c)` and where `(r, c) ~ (r', c')` iff `r != r'`,
//! `c != c'` and both cross entries `(r, c')`, `(r', c)` are zero. The
//! clique search is a colour-bounded branch and bound.

use thiserror::Error;

use crate::matrix::ConfigMatrix;
use crate::solution::Solution;

/// Default cap on the number of one-entries searched.
pub const DEFAULT_EXACT_LIMIT: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("matrix has {ones} one-entries, over the exact-search cap of {limit}")]
    TooLarge { ones: usize, limit: usize },
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub size: usize,
    pub witness: Solution,
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn and_not_in_place(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }
}

struct CliqueSearch {
    adj: Vec<Bits>,
    best: Vec<usize>,
}

impl CliqueSearch {
    /// Greedy colouring; returns vertices in non-decreasing colour with their colours.
    fn colour_sort(&self, p: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::new();
        let mut colours = Vec::new();
        let mut uncoloured = p.clone();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut q = uncoloured.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                q.and_not_in_place(&self.adj[v]);
                uncoloured.remove(v);
                order.push(v);
                colours.push(colour);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, current: &mut Vec<usize>, mut p: Bits) {
        let (order, colours) = self.colour_sort(&p);
        for i in (0..order.len()).rev() {
            if current.len() + colours[i] <= self.best.len() {
                return;
            }
            let v = order[i];
            current.push(v);
            let next = p.and(&self.adj[v]);
            if next.is_empty() {
                if current.len() > self.best.len() {
                    self.best = current.clone();
                }
            } else {
                self.expand(current, next);
            }
            current.pop();
            p.remove(v);
        }
    }
}

/// Exact maximum permutation submatrix with one witness. Refuses matrices
/// with more than `limit` one-entries.
pub fn max_perm_submatrix_exact(mat: &ConfigMatrix, limit: usize) -> Result<ExactResult, ExactError> {
    let ones: Vec<(usize, usize)> = (0..mat.rows.len())
        .flat_map(|r| mat.bits.ones_in_row(r).map(move |c| (r, c)))
        .collect();
    if ones.len() > limit {
        return Err(ExactError::TooLarge { ones: ones.len(), limit });
    }
    let n = ones.len();
    let mut adj = vec![Bits::new(n); n];
    for (u, &(r, c)) in ones.iter().enumerate() {
        for (v, &(r2, c2)) in ones.iter().enumerate().skip(u + 1) {
            if r != r2 && c != c2 && !mat.get(r, c2) && !mat.get(r2, c) {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    let mut search = CliqueSearch { adj, best: Vec::new() };
    let mut all = Bits::new(n);
    (0..n).for_each(|v| all.insert(v));
    if n > 0 {
        search.expand(&mut Vec::new(), all);
    }
    let mut chosen: Vec<(usize, usize)> = search.best.iter().map(|&v| ones[v]).collect();
    chosen.sort_unstable();
    let pairs = chosen
        .into_iter()
        .map(|(r, c)| (mat.rows[r].clone(), mat.cols[c].clone()))
        .collect();
    let witness = Solution::new(mat.m, pairs).expect("matrix configurations are valid");
    Ok(ExactResult { size: witness.k(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{build_matrix, BitMatrix, DEFAULT_MEMORY_BUDGET};
    use crate::solution::verify_solution;

    #[test]
    fn m3_and_m4() {
        let m3 = build_matrix(3, &[1], &[1], DEFAULT_MEMORY_BUDGET).unwrap();
        let r = max_perm_submatrix_exact(&m3, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(r.size, 2);
        assert_eq!(verify_solution(&r.witness), Ok(()));

        let m4 = build_matrix(4, &[1, 2], &[1], DEFAULT_MEMORY_BUDGET).unwrap();
        let r = max_perm_submatrix_exact(&m4, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(r.size, 6);
        assert_eq!(verify_solution(&r.witness), Ok(()));
    }

    #[test]
    fn cap() {
        let m4 = build_matrix(4, &[1, 2], &[1], DEFAULT_MEMORY_BUDGET).unwrap();
        let ones = m4.bits.count_ones();
        assert_eq!(
            max_perm_submatrix_exact(&m4, 3).unwrap_err(),
            ExactError::TooLarge { ones, limit: 3 }
        );
    }

    /// Brute force over all row subsets and column injections on a tiny matrix.
    fn brute_force(bits: &BitMatrix) -> usize {
        let (rows, cols) = (bits.rows(), bits.cols());
        let mut best = 0;
        for mask in 0u32..(1 << rows) {
            let chosen: Vec<usize> = (0..rows).filter(|r| mask >> r & 1 == 1).collect();
            if chosen.len() <= best {
                continue;
            }
            fn assign(bits: &BitMatrix, chosen: &[usize], i: usize, used: &mut Vec<usize>) -> bool {
                if i == chosen.len() {
                    return true;
                }
                for c in 0..bits.cols() {
                    if used.contains(&c) || !bits.get(chosen[i], c) {
                        continue;
                    }
                    let ok = used.iter().enumerate().all(|(j, &c2)| !bits.get(chosen[i], c2) && !bits.get(chosen[j], c));
                    if ok {
                        used.push(c);
                        if assign(bits, chosen, i + 1, used) {
                            return true;
                        }
                        used.pop();
                    }
                }
                false
            }
            if chosen.len() <= cols && assign(bits, &chosen, 0, &mut Vec::new()) {
                best = chosen.len();
            }
        }
        best
    }

    #[test]
    fn agrees_with_brute_force_on_m4() {
        let m4 = build_matrix(4, &[1, 2], &[1], DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(brute_force(&m4.bits), 6);
        let m3 = build_matrix(3, &[1], &[1], DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(brute_force(&m3.bits), 2);
    }
}
