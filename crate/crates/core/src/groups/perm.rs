use std::fmt;

use serde::Serialize;

use super::GroupError;

/// A bijection of `{1, ..., degree}`. Stored 0-based as a flat image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Box<[u8]>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation { images: (0..degree as u8).collect() }
    }

    /// From 1-based images: `images[i - 1] = g(i)`.
    pub fn from_images(images: &[usize]) -> Result<Self, GroupError> {
        let n = images.len();
        if n > u8::MAX as usize {
            return Err(GroupError::Degree(format!("degree {n} too large")));
        }
        let mut seen = vec![false; n];
        for &p in images {
            if p == 0 || p > n || seen[p - 1] {
                return Err(GroupError::NotBijection);
            }
            seen[p - 1] = true;
        }
        Ok(Permutation { images: images.iter().map(|&p| (p - 1) as u8).collect() })
    }

    pub(crate) fn from_raw(images: &[u8]) -> Self {
        Permutation { images: images.into() }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of a 1-based point.
    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point - 1] as usize + 1
    }

    pub fn raw(&self) -> &[u8] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.degree()];
        for (i, &p) in self.images.iter().enumerate() {
            inv[p as usize] = i as u8;
        }
        Permutation { images: inv.into() }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation { images: other.images.iter().map(|&p| self.images[p as usize]).collect() }
    }

    /// `c⁻¹ ∘ self ∘ c`.
    pub fn conjugate_by(&self, c: &Permutation) -> Self {
        c.inverse().compose(self).compose(c)
    }

    /// Disjoint cycles of length > 1, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p + 1);
                p = self.images[p] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Extends to a larger degree by fixing the new points.
    pub fn extend_to(&self, degree: usize) -> Result<Self, GroupError> {
        if degree < self.degree() || degree > u8::MAX as usize {
            return Err(GroupError::Degree(format!("cannot extend degree {} to {degree}", self.degree())));
        }
        let mut images = self.images.to_vec();
        images.extend(self.degree() as u8..degree as u8);
        Ok(Permutation { images: images.into() })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}[{}]", self.degree())
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Reads the cycle lists of `text` without building a permutation.
pub fn parse_cycle_lists(text: &str) -> Result<Vec<Vec<usize>>, GroupError> {
    let err = |column: usize, message: &str| GroupError::Parse { column, message: message.to_string() };
    let mut cycles = Vec::new();
    let mut chars = text.char_indices().map(|(i, c)| (i + 1, c)).peekable();
    let mut saw_any = false;
    loop {
        while chars.peek().is_some_and(|&(_, c)| c.is_whitespace()) {
            chars.next();
        }
        let Some((col, c)) = chars.next() else { break };
        if c != '(' {
            return Err(err(col, "expected `(`"));
        }
        saw_any = true;
        let mut body = String::new();
        let body_col = col + 1;
        loop {
            match chars.next() {
                Some((_, ')')) => break,
                Some((_, '(')) => return Err(err(col, "nested `(`")),
                Some((_, ch)) => body.push(ch),
                None => return Err(err(col, "unclosed `(`")),
            }
        }
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let points = trimmed
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| err(body_col, &format!("`{}` is not a point", p.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        cycles.push(points);
    }
    if !saw_any {
        return Err(err(1, "expected cycle notation such as `(1,2,3)` or `()`"));
    }
    Ok(cycles)
}

/// Builds a permutation from disjoint cycles. `()` and `(1)` are the identity.
pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Permutation, GroupError> {
    if degree > u8::MAX as usize {
        return Err(GroupError::Degree(format!("degree {degree} too large")));
    }
    let mut images: Vec<u8> = (0..degree as u8).collect();
    let mut used = vec![false; degree];
    for cycle in cycles {
        for &p in cycle {
            if p == 0 || p > degree {
                return Err(GroupError::PointOutOfRange { point: p, degree });
            }
            if used[p - 1] {
                return Err(GroupError::RepeatedPoint(p));
            }
            used[p - 1] = true;
        }
        for (i, &p) in cycle.iter().enumerate() {
            images[p - 1] = (cycle[(i + 1) % cycle.len()] - 1) as u8;
        }
    }
    Ok(Permutation { images: images.into() })
}

/// Parses disjoint-cycle notation such as `(1,2,3)(4,7,10)`.
pub fn parse_cycles(text: &str, degree: usize) -> Result<Permutation, GroupError> {
    from_cycles(degree, &parse_cycle_lists(text)?)
}
