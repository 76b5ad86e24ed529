use serde::Serialize;

use super::{GroupError, Permutation};
use crate::flow::{self, Configuration, Side};

/// An accepting pair that a group action transports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasePair {
    pub m: usize,
    pub t: usize,
    pub alice: Configuration,
    pub bob: Configuration,
}

impl BasePair {
    pub fn new(alice: Configuration, bob: Configuration) -> Result<Self, GroupError> {
        if flow::entry_bit(&alice, &bob)? != 1 {
            return Err(GroupError::InvalidBase(format!("({alice}, {bob}) does not send the water back to Alice")));
        }
        let (m, t) = (alice.pipes(), bob.hose_count());
        Ok(BasePair { m, t, alice, bob })
    }

    pub fn parse(m: usize, alice: &str, bob: &str) -> Result<Self, GroupError> {
        Self::new(Configuration::parse(Side::Alice, m, alice)?, Configuration::parse(Side::Bob, m, bob)?)
    }
}

/// `A = {0-1, 2-3, ..., (2t-2)-(2t-1), (2t+1)-(2t+2), ..., (m-1)-m}`,
/// `B = {1-2, 3-4, ..., (2t-1)-2t}`; pipe `2t` is left open on Alice's side.
pub fn standard_base(m: usize, t: usize) -> Result<BasePair, GroupError> {
    if m < 2 || !m.is_multiple_of(2) || m > flow::MAX_PIPES {
        return Err(GroupError::Range(format!("m={m} must be even and at most {}", flow::MAX_PIPES)));
    }
    if t == 0 || t > (m - 1) / 2 {
        return Err(GroupError::Range(format!("t={t} outside 1..={} for m={m}", (m - 1) / 2)));
    }
    let mut alice: Vec<(usize, usize)> = (0..t).map(|i| (2 * i, 2 * i + 1)).collect();
    alice.extend((2 * t + 1..m).step_by(2).map(|j| (j, j + 1)));
    let bob: Vec<(usize, usize)> = (1..=t).map(|i| (2 * i - 1, 2 * i)).collect();
    BasePair::new(Configuration::new(Side::Alice, m, &alice)?, Configuration::new(Side::Bob, m, &bob)?)
}

/// `(A(g), B(g))`: every pipe label of the base pair mapped through `g`.
pub fn act(g: &Permutation, base: &BasePair) -> Result<(Configuration, Configuration), GroupError> {
    if g.degree() != base.m {
        return Err(GroupError::DegreeMismatch { expected: base.m, got: g.degree() });
    }
    Ok((base.alice.permuted(g.raw()), base.bob.permuted(g.raw())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::parse_cycles;

    #[test]
    fn standard_bases() {
        let b = standard_base(4, 1).unwrap();
        assert_eq!((b.alice.to_string(), b.bob.to_string()), ("0-1,3-4".into(), "1-2".into()));
        let b = standard_base(10, 2).unwrap();
        assert_eq!(b.alice.to_string(), "0-1,2-3,5-6,7-8,9-10");
        assert_eq!(b.bob.to_string(), "1-2,3-4");
        let b = standard_base(28, 7).unwrap();
        assert_eq!(b.bob.hose_count(), 7);
        assert_eq!(b.bob.to_string(), "1-2,3-4,5-6,7-8,9-10,11-12,13-14");
        assert_eq!(b.alice.open_pipes(), [14]);
        assert_eq!(flow::water_out(&b.alice, &b.bob), Ok(14));
        assert!(standard_base(5, 1).is_err());
        assert!(standard_base(4, 2).is_err());
    }

    #[test]
    fn action_examples() {
        let base = BasePair::parse(4, "0-1,2-3", "1-4").unwrap();
        let (a, b) = act(&Permutation::identity(4), &base).unwrap();
        assert_eq!((a, b), (base.alice.clone(), base.bob.clone()));

        let (a, b) = act(&parse_cycles("(1,2,3)", 4).unwrap(), &base).unwrap();
        assert_eq!((a.to_string(), b.to_string()), ("0-2,1-3".into(), "2-4".into()));

        let (a, b) = act(&parse_cycles("(2,3,4)", 4).unwrap(), &base).unwrap();
        assert_eq!((a.to_string(), b.to_string()), ("0-1,3-4".into(), "1-2".into()));

        assert_eq!(
            act(&Permutation::identity(5), &base),
            Err(GroupError::DegreeMismatch { expected: 4, got: 5 })
        );
    }

    #[test]
    fn base_must_accept() {
        assert!(matches!(BasePair::parse(4, "0-1", "2-3"), Err(GroupError::InvalidBase(_))));
    }
}
