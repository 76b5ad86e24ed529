//! Pipe configurations and water-flow simulation.
//!
//! Pipes are labelled `1..=m`. Alice additionally owns the tap, label `0`.
//! A configuration is a partial matching of the labels on one player's side;
//! each matched pair is a hose.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Label of Alice's water tap.
pub const TAP: usize = 0;

/// Largest supported pipe count. Labels are stored as bytes.
pub const MAX_PIPES: usize = 254;

const OPEN: u8 = u8::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Side {
    Alice,
    Bob,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Alice => f.write_str("Alice"),
            Side::Bob => f.write_str("Bob"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("the tap (endpoint 0) is not connected")]
    TapUnconnected,
    #[error("expected a configuration for {expected}, got one for {got}")]
    WrongSide { expected: Side, got: Side },
    #[error("pipe count mismatch: {0} vs {1}")]
    PipeCountMismatch(usize, usize),
    #[error("water leaves on Bob's side (pipe {0}), not Alice's")]
    NotAliceExit(usize),
}

/// A partial matching of pipe endpoints on one side.
///
/// Stored as a partner table of length `m + 1`; entry 0 is the tap and is
/// always open for Bob.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    side: Side,
    partner: Box<[u8]>,
}

impl Configuration {
    pub fn empty(side: Side, m: usize) -> Result<Self, FlowError> {
        if m == 0 || m > MAX_PIPES {
            return Err(FlowError::InvalidMatching(format!(
                "pipe count {m} outside 1..={MAX_PIPES}"
            )));
        }
        Ok(Configuration {
            side,
            partner: vec![OPEN; m + 1].into_boxed_slice(),
        })
    }

    /// Builds a configuration from a hose list, validating the matching.
    pub fn new(side: Side, m: usize, hoses: &[(usize, usize)]) -> Result<Self, FlowError> {
        let mut c = Self::empty(side, m)?;
        for &(x, y) in hoses {
            c.connect(x, y)?;
        }
        Ok(c)
    }

    fn connect(&mut self, x: usize, y: usize) -> Result<(), FlowError> {
        let m = self.pipes();
        let lowest = match self.side {
            Side::Alice => TAP,
            Side::Bob => 1,
        };
        for p in [x, y] {
            if p < lowest || p > m {
                return Err(FlowError::InvalidMatching(format!(
                    "label {p} out of range {lowest}..={m} for {}",
                    self.side
                )));
            }
        }
        if x == y {
            return Err(FlowError::InvalidMatching(format!("hose {x}-{y} is a loop")));
        }
        for p in [x, y] {
            if self.partner[p] != OPEN {
                return Err(FlowError::InvalidMatching(format!(
                    "endpoint {p} used by more than one hose"
                )));
            }
        }
        self.partner[x] = y as u8;
        self.partner[y] = x as u8;
        Ok(())
    }

    /// Parses `0-1,2-3` style text. `-` is the empty configuration.
    pub fn parse(side: Side, m: usize, text: &str) -> Result<Self, FlowError> {
        let mut c = Self::empty(side, m)?;
        let compact: Vec<(usize, char)> = text
            .char_indices()
            .filter(|(_, ch)| !ch.is_whitespace())
            .map(|(i, ch)| (i + 1, ch))
            .collect();
        if compact.is_empty() {
            return Err(FlowError::Parse {
                column: 1,
                message: "empty configuration (write `-` for no hoses)".into(),
            });
        }
        if compact.len() == 1 && compact[0].1 == '-' {
            return Ok(c);
        }
        for hose in compact.split(|&(_, ch)| ch == ',') {
            let column = hose.first().map(|&(i, _)| i).unwrap_or(text.len() + 1);
            let parts: Vec<&[(usize, char)]> = hose.split(|&(_, ch)| ch == '-').collect();
            if parts.len() != 2 {
                return Err(FlowError::Parse {
                    column,
                    message: "expected a hose of the form x-y".into(),
                });
            }
            let mut ends = [0usize; 2];
            for (slot, part) in ends.iter_mut().zip(&parts) {
                let col = part.first().map(|&(i, _)| i).unwrap_or(column);
                let digits: String = part.iter().map(|&(_, ch)| ch).collect();
                *slot = digits.parse().map_err(|_| FlowError::Parse {
                    column: col,
                    message: format!("`{digits}` is not a pipe label"),
                })?;
            }
            c.connect(ends[0], ends[1])?;
        }
        Ok(c)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Number of pipes `m`.
    pub fn pipes(&self) -> usize {
        self.partner.len() - 1
    }

    pub fn partner(&self, label: usize) -> Option<usize> {
        match self.partner.get(label) {
            Some(&p) if p != OPEN => Some(p as usize),
            _ => None,
        }
    }

    pub fn is_open(&self, label: usize) -> bool {
        self.partner(label).is_none()
    }

    /// Hoses as sorted `(low, high)` pairs.
    pub fn hoses(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(x, &y)| y != OPEN && x < y as usize)
            .map(|(x, &y)| (x, y as usize))
            .collect()
    }

    pub fn hose_count(&self) -> usize {
        self.partner.iter().filter(|&&p| p != OPEN).count() / 2
    }

    /// Pipe labels (never the tap) without a hose.
    pub fn open_pipes(&self) -> Vec<usize> {
        (1..=self.pipes()).filter(|&p| self.is_open(p)).collect()
    }

    /// Raw partner table; equal configurations have equal keys.
    pub fn key(&self) -> &[u8] {
        &self.partner
    }

    pub fn canonical_form(&self) -> String {
        self.to_string()
    }

    /// True when every hose of `self` is also a hose of `other`.
    pub fn is_subset_of(&self, other: &Configuration) -> bool {
        self.side == other.side
            && self.partner.len() == other.partner.len()
            && self
                .partner
                .iter()
                .zip(other.partner.iter())
                .all(|(&a, &b)| a == OPEN || a == b)
    }

    /// Applies `f` to every pipe label (the tap stays fixed).
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Result<Self, FlowError> {
        let map = |p: usize| if p == TAP { TAP } else { f(p) };
        let hoses: Vec<(usize, usize)> = self.hoses().into_iter().map(|(x, y)| (map(x), map(y))).collect();
        Self::new(self.side, self.pipes(), &hoses)
    }

    /// Copies the hoses into a larger pipe range, adding `offset` to every
    /// pipe label. The tap hose, if any, is dropped.
    pub fn shifted_hoses(&self, offset: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.hoses()
            .into_iter()
            .filter(|&(x, _)| x != TAP)
            .map(move |(x, y)| (x + offset, y + offset))
    }

    /// Relabels pipes through 0-based `images` (pipe `p` goes to
    /// `images[p - 1] + 1`); the tap stays fixed.
    pub(crate) fn permuted(&self, images: &[u8]) -> Self {
        debug_assert_eq!(images.len(), self.pipes());
        let map = |p: u8| if p == 0 { 0 } else { images[p as usize - 1] + 1 };
        let mut partner = vec![OPEN; self.partner.len()];
        for (p, &q) in self.partner.iter().enumerate() {
            if q != OPEN {
                partner[map(p as u8) as usize] = map(q);
            }
        }
        Configuration { side: self.side, partner: partner.into_boxed_slice() }
    }

    pub(crate) fn add_hose(&mut self, x: usize, y: usize) -> Result<(), FlowError> {
        self.connect(x, y)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hoses = self.hoses();
        if hoses.is_empty() {
            return f.write_str("-");
        }
        for (i, (x, y)) in hoses.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}-{y}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[m={}]{{{}}}", self.side, self.pipes(), self)
    }
}

impl Ord for Configuration {
    /// Lexicographic on the sorted hose list.
    fn cmp(&self, other: &Self) -> Ordering {
        (self.side, self.pipes(), self.hoses()).cmp(&(other.side, other.pipes(), other.hoses()))
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowOutcome {
    pub exit_side: Side,
    pub exit_pipe: usize,
    /// Pipes in the order the water runs through them.
    pub path: Vec<usize>,
}

impl FlowOutcome {
    pub fn bit(&self) -> u8 {
        u8::from(self.exit_side == Side::Alice)
    }
}

fn check_pair(a: &Configuration, b: &Configuration) -> Result<(), FlowError> {
    if a.side != Side::Alice {
        return Err(FlowError::WrongSide { expected: Side::Alice, got: a.side });
    }
    if b.side != Side::Bob {
        return Err(FlowError::WrongSide { expected: Side::Bob, got: b.side });
    }
    if a.pipes() != b.pipes() {
        return Err(FlowError::PipeCountMismatch(a.pipes(), b.pipes()));
    }
    if a.is_open(TAP) {
        return Err(FlowError::TapUnconnected);
    }
    Ok(())
}

/// Follows the water without recording the path. Callers have checked the pair.
#[inline]
pub(crate) fn trace_exit(a: &Configuration, b: &Configuration) -> (Side, usize) {
    let (ap, bp) = (&a.partner, &b.partner);
    let mut pipe = ap[TAP] as usize;
    loop {
        match bp[pipe] {
            OPEN => return (Side::Bob, pipe),
            q => pipe = q as usize,
        }
        match ap[pipe] {
            OPEN => return (Side::Alice, pipe),
            r => pipe = r as usize,
        }
    }
}

#[inline]
pub(crate) fn trace_bit(a: &Configuration, b: &Configuration) -> bool {
    trace_exit(a, b).0 == Side::Alice
}

/// Opens the tap and follows the water until it leaves one side.
pub fn simulate_flow(a: &Configuration, b: &Configuration) -> Result<FlowOutcome, FlowError> {
    check_pair(a, b)?;
    let mut pipe = a.partner[TAP] as usize;
    let mut path = vec![pipe];
    loop {
        match b.partner(pipe) {
            None => {
                return Ok(FlowOutcome { exit_side: Side::Bob, exit_pipe: pipe, path });
            }
            Some(q) => {
                pipe = q;
                path.push(pipe);
            }
        }
        match a.partner(pipe) {
            None => {
                return Ok(FlowOutcome { exit_side: Side::Alice, exit_pipe: pipe, path });
            }
            Some(r) => {
                pipe = r;
                path.push(pipe);
            }
        }
        debug_assert!(path.len() <= a.pipes());
    }
}

/// 1 when the water leaves on Alice's side.
pub fn entry_bit(a: &Configuration, b: &Configuration) -> Result<u8, FlowError> {
    check_pair(a, b)?;
    Ok(u8::from(trace_bit(a, b)))
}

/// The pipe connected to the tap.
pub fn water_in(a: &Configuration) -> Result<usize, FlowError> {
    if a.side != Side::Alice {
        return Err(FlowError::WrongSide { expected: Side::Alice, got: a.side });
    }
    a.partner(TAP).ok_or(FlowError::TapUnconnected)
}

/// The pipe where the water leaves Alice's side; errors if it leaves Bob's.
pub fn water_out(a: &Configuration, b: &Configuration) -> Result<usize, FlowError> {
    check_pair(a, b)?;
    match trace_exit(a, b) {
        (Side::Alice, pipe) => Ok(pipe),
        (Side::Bob, pipe) => Err(FlowError::NotAliceExit(pipe)),
    }
}
