//! Randomised grow-and-shrink search for large permutation submatrices.
//!
//! Rows are the last-row-block (Alice leaves exactly one pipe open) and
//! columns are all Bob configurations with a fixed number of hoses, so no
//! column can cover another. The search alternates between two states:
//!
//! * `AddRow`: pick a row outside `X` that is all-zero on `Y`. If none
//!   exists, drop a random diagonal pair and retry.
//! * `AddCol(x)`: pick a column outside `Y` that is all-zero on `X` and has
//!   a one at `x`; if found, `(x, y)` joins the diagonal. Otherwise, with
//!   probability `discard_prob` forget `x` and go back to `AddRow`, else drop a
//!   random diagonal pair and retry with the same `x`.
//!
//! "First match in a random scan order" is drawn as a uniform choice among
//! all matches, which has the same distribution. Eligible rows are kept in
//! an indexed set so each step is cheap even for the 124 740-row m = 12
//! block.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::flow::{self, Configuration};
use crate::matrix::{enumerate_alice, enumerate_bob, BitMatrix, MatrixError};
use crate::solution::{verify_solution, Solution, Violation};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("internal error: extracted submatrix failed verification ({0})")]
    Inconsistent(Violation),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchParams {
    pub m: usize,
    pub bob_hoses: usize,
    pub discard_prob: f64,
    pub rng_seed: u64,
    pub no_improve_timeout: Option<Duration>,
    pub max_wall_time: Option<Duration>,
    /// Step budgets make runs reproducible end to end.
    pub max_steps: Option<u64>,
    pub no_improve_steps: Option<u64>,
    /// Stop as soon as a submatrix of this size is found.
    pub target_k: Option<usize>,
}

/// Hoses covering at most half of the pipes: `floor(m / 4)`, clamped to the
/// valid range.
pub fn default_bob_hoses(m: usize) -> usize {
    (m / 4).clamp(1, (m.saturating_sub(1) / 2).max(1))
}

impl SearchParams {
    pub fn new(m: usize, bob_hoses: usize, rng_seed: u64) -> Self {
        SearchParams {
            m,
            bob_hoses,
            discard_prob: 0.25,
            rng_seed,
            no_improve_timeout: Some(Duration::from_secs(10)),
            max_wall_time: Some(Duration::from_secs(60)),
            max_steps: None,
            no_improve_steps: None,
            target_k: None,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |s: String| Err(SearchError::InvalidParams(s));
        if self.m < 2 || !self.m.is_multiple_of(2) || self.m > flow::MAX_PIPES {
            return bad(format!("m={} must be even and in 2..={}", self.m, flow::MAX_PIPES));
        }
        let max_t = (self.m - 1) / 2;
        if self.bob_hoses == 0 || self.bob_hoses > max_t {
            return bad(format!("bob hoses t={} outside 1..={max_t} for m={}", self.bob_hoses, self.m));
        }
        if !(0.0..=1.0).contains(&self.discard_prob) {
            return bad(format!("discard probability {} outside [0, 1]", self.discard_prob));
        }
        if self.no_improve_timeout.is_none()
            && self.max_wall_time.is_none()
            && self.max_steps.is_none()
            && self.no_improve_steps.is_none()
        {
            return bad("no stopping budget given".into());
        }
        Ok(())
    }
}

/// Membership queries over the search matrix.
pub trait EntryOracle: Send + Sync {
    fn entry(&self, row: usize, col: usize) -> bool;
    /// Columns with a one in `row`, ascending.
    fn row_ones(&self, row: usize, out: &mut Vec<usize>);
    /// Rows with a one in `col`, ascending.
    fn col_ones(&self, col: usize, out: &mut Vec<usize>);
}

/// Bit-packed table plus its transpose.
pub struct DenseOracle {
    by_row: BitMatrix,
    by_col: BitMatrix,
}

impl EntryOracle for DenseOracle {
    fn entry(&self, row: usize, col: usize) -> bool {
        self.by_row.get(row, col)
    }
    fn row_ones(&self, row: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(self.by_row.ones_in_row(row));
    }
    fn col_ones(&self, col: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(self.by_col.ones_in_row(col));
    }
}

/// Simulates every query; used when the table does not fit the budget.
pub struct SimulatedOracle {
    rows: Vec<Configuration>,
    cols: Vec<Configuration>,
}

impl EntryOracle for SimulatedOracle {
    fn entry(&self, row: usize, col: usize) -> bool {
        flow::trace_bit(&self.rows[row], &self.cols[col])
    }
    fn row_ones(&self, row: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..self.cols.len()).filter(|&c| self.entry(row, c)));
    }
    fn col_ones(&self, col: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..self.rows.len()).filter(|&r| self.entry(r, col)));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    Dense,
    Simulated,
}

/// The last-row-block against all `t`-hose Bob configurations.
pub struct SearchSpace {
    pub m: usize,
    pub bob_hoses: usize,
    pub rows: Vec<Configuration>,
    pub cols: Vec<Configuration>,
    backend: Backend,
    oracle: Box<dyn EntryOracle>,
}

impl SearchSpace {
    /// Uses the dense backend when both bit tables fit `memory_budget`.
    pub fn new(m: usize, bob_hoses: usize, memory_budget: usize) -> Result<Self, SearchError> {
        SearchParams::new(m, bob_hoses, 0).validate()?;
        let rows = enumerate_alice(m, m / 2)?;
        let cols = enumerate_bob(m, bob_hoses)?;
        let needed = 2 * BitMatrix::bytes_needed(rows.len(), cols.len());
        let backend = if needed <= memory_budget { Backend::Dense } else { Backend::Simulated };
        Ok(Self::assemble(m, bob_hoses, rows, cols, backend))
    }

    pub fn with_backend(m: usize, bob_hoses: usize, backend: Backend) -> Result<Self, SearchError> {
        SearchParams::new(m, bob_hoses, 0).validate()?;
        let rows = enumerate_alice(m, m / 2)?;
        let cols = enumerate_bob(m, bob_hoses)?;
        Ok(Self::assemble(m, bob_hoses, rows, cols, backend))
    }

    fn assemble(
        m: usize,
        bob_hoses: usize,
        rows: Vec<Configuration>,
        cols: Vec<Configuration>,
        backend: Backend,
    ) -> Self {
        let oracle: Box<dyn EntryOracle> = match backend {
            Backend::Dense => {
                let by_row = BitMatrix::from_fn(rows.len(), cols.len(), |r, c| flow::trace_bit(&rows[r], &cols[c]));
                let by_col = by_row.transpose();
                Box::new(DenseOracle { by_row, by_col })
            }
            Backend::Simulated => Box::new(SimulatedOracle { rows: rows.clone(), cols: cols.clone() }),
        };
        SearchSpace { m, bob_hoses, rows, cols, backend, oracle }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        self.oracle.entry(row, col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Improvement {
    pub step: u64,
    #[serde(serialize_with = "as_secs")]
    pub elapsed: Duration,
    pub k: usize,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    TargetReached,
    MaxSteps,
    NoImproveSteps,
    MaxWallTime,
    NoImproveTimeout,
    Exhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub seed: u64,
    pub bob_hoses: usize,
    pub best: Solution,
    pub history: Vec<Improvement>,
    pub steps: u64,
    pub stop: StopReason,
}

/// Passed to observers on every improvement of a run's best.
#[derive(Debug, Clone, Copy)]
pub struct ImprovementEvent<'a> {
    pub m: usize,
    pub bob_hoses: usize,
    pub seed: u64,
    pub improvement: &'a Improvement,
    pub solution: &'a Solution,
}

/// Set of indices with O(1) insert, remove and uniform sampling.
struct IndexSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexSet {
    const ABSENT: u32 = u32::MAX;

    fn full(n: usize) -> Self {
        IndexSet { items: (0..n as u32).collect(), pos: (0..n as u32).collect() }
    }
    fn insert(&mut self, i: usize) {
        if self.pos[i] == Self::ABSENT {
            self.pos[i] = self.items.len() as u32;
            self.items.push(i as u32);
        }
    }
    fn remove(&mut self, i: usize) {
        let p = self.pos[i];
        if p != Self::ABSENT {
            let last = *self.items.last().unwrap();
            self.items.swap_remove(p as usize);
            if last as usize != i {
                self.pos[last as usize] = p;
            }
            self.pos[i] = Self::ABSENT;
        }
    }
    fn sample(&self, rng: &mut impl Rng) -> Option<usize> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.gen_range(0..self.items.len())] as usize)
        }
    }
}

enum State {
    AddRow,
    AddCol(usize),
}

struct Walk<'a> {
    space: &'a SearchSpace,
    in_x: Vec<bool>,
    in_y: Vec<bool>,
    /// Ones of each row inside `Y`.
    row_hits: Vec<u32>,
    /// Ones of each column inside `X`.
    col_hits: Vec<u32>,
    eligible_rows: IndexSet,
    diagonal: Vec<(usize, usize)>,
    scratch: Vec<usize>,
}

impl<'a> Walk<'a> {
    fn new(space: &'a SearchSpace) -> Self {
        let (nr, nc) = (space.rows.len(), space.cols.len());
        Walk {
            space,
            in_x: vec![false; nr],
            in_y: vec![false; nc],
            row_hits: vec![0; nr],
            col_hits: vec![0; nc],
            eligible_rows: IndexSet::full(nr),
            diagonal: Vec::new(),
            scratch: Vec::new(),
        }
    }

    fn add_pair(&mut self, x: usize, y: usize) {
        self.in_x[x] = true;
        self.in_y[y] = true;
        self.eligible_rows.remove(x);
        self.space.oracle.col_ones(y, &mut self.scratch);
        for &r in &self.scratch {
            self.row_hits[r] += 1;
            if self.row_hits[r] == 1 {
                self.eligible_rows.remove(r);
            }
        }
        self.space.oracle.row_ones(x, &mut self.scratch);
        for &c in &self.scratch {
            self.col_hits[c] += 1;
        }
        self.diagonal.push((x, y));
    }

    fn remove_random_pair(&mut self, rng: &mut impl Rng) -> bool {
        if self.diagonal.is_empty() {
            return false;
        }
        let i = rng.gen_range(0..self.diagonal.len());
        let (x, y) = self.diagonal.swap_remove(i);
        self.in_x[x] = false;
        self.in_y[y] = false;
        self.space.oracle.col_ones(y, &mut self.scratch);
        for &r in &self.scratch {
            self.row_hits[r] -= 1;
            if self.row_hits[r] == 0 && !self.in_x[r] {
                self.eligible_rows.insert(r);
            }
        }
        self.space.oracle.row_ones(x, &mut self.scratch);
        for &c in &self.scratch {
            self.col_hits[c] -= 1;
        }
        true
    }

    fn pick_column(&mut self, x: usize, rng: &mut impl Rng) -> Option<usize> {
        self.space.oracle.row_ones(x, &mut self.scratch);
        let (in_y, col_hits) = (&self.in_y, &self.col_hits);
        self.scratch.retain(|&c| !in_y[c] && col_hits[c] == 0);
        if self.scratch.is_empty() {
            None
        } else {
            Some(self.scratch[rng.gen_range(0..self.scratch.len())])
        }
    }

    fn solution(&self) -> Solution {
        let mut d = self.diagonal.clone();
        d.sort_unstable();
        let pairs = d
            .into_iter()
            .map(|(x, y)| (self.space.rows[x].clone(), self.space.cols[y].clone()))
            .collect();
        Solution::new(self.space.m, pairs).expect("search configurations are valid")
    }
}

const CLOCK_CHECK_INTERVAL: u64 = 1024;

impl SearchSpace {
    /// One seeded run. `observer` sees every improvement of the run's best.
    pub fn search(
        &self,
        params: &SearchParams,
        observer: &(dyn Fn(ImprovementEvent<'_>) + Sync),
    ) -> Result<SearchOutcome, SearchError> {
        params.validate()?;
        if params.m != self.m || params.bob_hoses != self.bob_hoses {
            return Err(SearchError::InvalidParams(format!(
                "parameters (m={}, t={}) do not match the search space (m={}, t={})",
                params.m, params.bob_hoses, self.m, self.bob_hoses
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
        let mut walk = Walk::new(self);
        let start = Instant::now();
        let mut best = Solution::new(self.m, Vec::new()).expect("empty solution");
        let mut history = Vec::new();
        let (mut last_step, mut last_time) = (0u64, start);
        let mut state = State::AddRow;
        let mut steps = 0u64;

        let stop = loop {
            if params.target_k.is_some_and(|t| best.k() >= t) {
                break StopReason::TargetReached;
            }
            if params.max_steps.is_some_and(|s| steps >= s) {
                break StopReason::MaxSteps;
            }
            if params.no_improve_steps.is_some_and(|s| steps - last_step >= s) {
                break StopReason::NoImproveSteps;
            }
            if steps.is_multiple_of(CLOCK_CHECK_INTERVAL) {
                let now = Instant::now();
                if params.max_wall_time.is_some_and(|d| now - start >= d) {
                    break StopReason::MaxWallTime;
                }
                if params.no_improve_timeout.is_some_and(|d| now - last_time >= d) {
                    break StopReason::NoImproveTimeout;
                }
            }
            steps += 1;

            state = match state {
                State::AddRow => match walk.eligible_rows.sample(&mut rng) {
                    Some(x) => State::AddCol(x),
                    None => {
                        if !walk.remove_random_pair(&mut rng) {
                            break StopReason::Exhausted;
                        }
                        State::AddRow
                    }
                },
                State::AddCol(x) => match walk.pick_column(x, &mut rng) {
                    Some(y) => {
                        walk.add_pair(x, y);
                        if walk.diagonal.len() > best.k() {
                            let candidate = walk.solution();
                            verify_solution(&candidate).map_err(SearchError::Inconsistent)?;
                            let now = Instant::now();
                            let improvement = Improvement { step: steps, elapsed: now - start, k: candidate.k() };
                            observer(ImprovementEvent {
                                m: self.m,
                                bob_hoses: self.bob_hoses,
                                seed: params.rng_seed,
                                improvement: &improvement,
                                solution: &candidate,
                            });
                            history.push(improvement);
                            best = candidate;
                            last_step = steps;
                            last_time = now;
                        }
                        State::AddRow
                    }
                    None => {
                        if rng.gen::<f64>() < params.discard_prob || !walk.remove_random_pair(&mut rng) {
                            State::AddRow
                        } else {
                            State::AddCol(x)
                        }
                    }
                },
            };
        };

        Ok(SearchOutcome { seed: params.rng_seed, bob_hoses: self.bob_hoses, best, history, steps, stop })
    }
}

/// Builds the search space and runs one search.
pub fn sa_search(params: &SearchParams, memory_budget: usize) -> Result<SearchOutcome, SearchError> {
    params.validate()?;
    SearchSpace::new(params.m, params.bob_hoses, memory_budget)?.search(params, &|_| {})
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartOutcome {
    pub best: SearchOutcome,
    pub runs: Vec<SearchOutcome>,
}

/// Runs `restarts` searches with seeds `seed, seed + 1, ...` and keeps the
/// largest result (earliest run on ties). With `jobs > 1` the runs execute
/// in parallel and observer calls may interleave across runs.
pub fn restart_loop(
    space: &SearchSpace,
    params: &SearchParams,
    restarts: usize,
    jobs: usize,
    observer: &(dyn Fn(ImprovementEvent<'_>) + Sync),
) -> Result<RestartOutcome, SearchError> {
    params.validate()?;
    if restarts == 0 {
        return Err(SearchError::InvalidParams("restarts must be at least 1".into()));
    }
    let run = |i: usize| {
        let p = SearchParams { rng_seed: params.rng_seed.wrapping_add(i as u64), ..params.clone() };
        space.search(&p, observer)
    };
    let runs: Vec<SearchOutcome> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| SearchError::InvalidParams(e.to_string()))?;
        let cell = Mutex::new(Vec::new());
        pool.install(|| {
            (0..restarts).into_par_iter().for_each(|i| {
                let r = run(i);
                cell.lock().unwrap().push((i, r));
            })
        });
        let mut all = cell.into_inner().unwrap();
        all.sort_by_key(|(i, _)| *i);
        all.into_iter().map(|(_, r)| r).collect::<Result<_, _>>()?
    } else {
        let mut runs = Vec::with_capacity(restarts);
        for i in 0..restarts {
            let r = run(i)?;
            let done = params.target_k.is_some_and(|t| r.best.k() >= t);
            runs.push(r);
            if done {
                break;
            }
        }
        runs
    };
    let best = runs
        .iter()
        .fold(None::<&SearchOutcome>, |acc, r| match acc {
            Some(b) if b.best.k() >= r.best.k() => Some(b),
            _ => Some(r),
        })
        .expect("at least one run")
        .clone();
    Ok(RestartOutcome { best, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DEFAULT_MEMORY_BUDGET;
    use crate::solution::antichain_check;

    fn steps(m: usize, t: usize, seed: u64, n: u64) -> SearchParams {
        SearchParams {
            no_improve_timeout: None,
            max_wall_time: None,
            max_steps: Some(n),
            ..SearchParams::new(m, t, seed)
        }
    }

    #[test]
    fn params_are_validated() {
        assert!(SearchParams::new(5, 1, 0).validate().is_err());
        assert!(SearchParams::new(6, 3, 0).validate().is_err());
        assert!(SearchParams::new(6, 0, 0).validate().is_err());
        let p = SearchParams { discard_prob: 1.5, ..SearchParams::new(6, 2, 0) };
        assert!(p.validate().is_err());
        let p = SearchParams { no_improve_timeout: None, max_wall_time: None, ..SearchParams::new(6, 2, 0) };
        assert!(p.validate().is_err());
        assert!(SearchParams::new(6, 2, 0).validate().is_ok());
    }

    #[test]
    fn default_t() {
        assert_eq!(default_bob_hoses(4), 1);
        assert_eq!(default_bob_hoses(6), 1);
        assert_eq!(default_bob_hoses(8), 2);
        assert_eq!(default_bob_hoses(10), 2);
        assert_eq!(default_bob_hoses(12), 3);
    }

    #[test]
    fn index_set() {
        let mut s = IndexSet::full(5);
        s.remove(2);
        s.remove(4);
        s.remove(2);
        assert_eq!(s.items.len(), 3);
        s.insert(4);
        s.insert(4);
        let mut v = s.items.clone();
        v.sort();
        assert_eq!(v, [0, 1, 3, 4]);
        for (i, &p) in s.pos.iter().enumerate() {
            if p != IndexSet::ABSENT {
                assert_eq!(s.items[p as usize] as usize, i);
            }
        }
    }

    #[test]
    fn finds_six_on_four_pipes() {
        let mut p = steps(4, 1, 7, 10_000);
        p.target_k = Some(6);
        let out = sa_search(&p, DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(out.best.k(), 6);
        assert_eq!(out.stop, StopReason::TargetReached);
        assert_eq!(verify_solution(&out.best), Ok(()));
        assert!(antichain_check(&out.best.bob().cloned().collect::<Vec<_>>()).is_ok());
    }

    #[test]
    fn history_is_increasing() {
        let out = sa_search(&steps(6, 2, 3, 20_000), DEFAULT_MEMORY_BUDGET).unwrap();
        assert!(out.history.windows(2).all(|w| w[0].k < w[1].k && w[0].step < w[1].step));
        assert_eq!(out.history.last().unwrap().k, out.best.k());
    }

    #[test]
    fn seeded_runs_repeat() {
        let space = SearchSpace::new(6, 2, DEFAULT_MEMORY_BUDGET).unwrap();
        let a = space.search(&steps(6, 2, 11, 5_000), &|_| {}).unwrap();
        let b = space.search(&steps(6, 2, 11, 5_000), &|_| {}).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(
            a.history.iter().map(|h| (h.step, h.k)).collect::<Vec<_>>(),
            b.history.iter().map(|h| (h.step, h.k)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn dense_and_simulated_backends_agree() {
        let dense = SearchSpace::with_backend(6, 2, Backend::Dense).unwrap();
        let sim = SearchSpace::with_backend(6, 2, Backend::Simulated).unwrap();
        for seed in 0..3 {
            let a = dense.search(&steps(6, 2, seed, 3_000), &|_| {}).unwrap();
            let b = sim.search(&steps(6, 2, seed, 3_000), &|_| {}).unwrap();
            assert_eq!(a.best, b.best);
            assert_eq!(a.steps, b.steps);
        }
    }

    #[test]
    fn small_budget_selects_simulation() {
        assert_eq!(SearchSpace::new(6, 2, 10).unwrap().backend(), Backend::Simulated);
        assert_eq!(SearchSpace::new(6, 2, DEFAULT_MEMORY_BUDGET).unwrap().backend(), Backend::Dense);
    }

    #[test]
    fn restarts_keep_the_best() {
        let space = SearchSpace::new(4, 1, DEFAULT_MEMORY_BUDGET).unwrap();
        let out = restart_loop(&space, &steps(4, 1, 0, 2_000), 3, 1, &|_| {}).unwrap();
        assert_eq!(out.runs.len(), 3);
        assert_eq!(out.best.best.k(), 6);
        assert_eq!(out.runs.iter().map(|r| r.seed).collect::<Vec<_>>(), [0, 1, 2]);
        let par = restart_loop(&space, &steps(4, 1, 0, 2_000), 3, 2, &|_| {}).unwrap();
        assert_eq!(par.best.best, out.best.best);
    }

    #[test]
    fn observer_sees_every_improvement() {
        let space = SearchSpace::new(6, 2, DEFAULT_MEMORY_BUDGET).unwrap();
        let seen = Mutex::new(Vec::new());
        let out = space
            .search(&steps(6, 2, 5, 10_000), &|e| seen.lock().unwrap().push(e.improvement.k))
            .unwrap();
        assert_eq!(*seen.lock().unwrap(), out.history.iter().map(|h| h.k).collect::<Vec<_>>());
    }
}
