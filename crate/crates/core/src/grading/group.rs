use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finitely generated abelian group `Z^r × Z/m_1 × … × Z/m_t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GradingGroup {
    pub free_rank: usize,
    #[serde(default, rename = "torsion")]
    pub torsion: Vec<u32>,
}

/// A group element in normalized coordinates: torsion coordinates are
/// reduced into `[0, m)`, so structural equality is group equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem(Vec<i64>);

impl GroupElem {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl GradingGroup {
    pub fn new(free_rank: usize, torsion: Vec<u32>) -> Result<Self> {
        if let Some(m) = torsion.iter().find(|&&m| m < 2) {
            return Err(Error::Structural(format!("torsion order {m} must be at least 2")));
        }
        Ok(Self { free_rank, torsion })
    }

    pub fn trivial() -> Self {
        Self { free_rank: 0, torsion: Vec::new() }
    }

    pub fn integers() -> Self {
        Self { free_rank: 1, torsion: Vec::new() }
    }

    pub fn z2() -> Self {
        Self { free_rank: 0, torsion: vec![2] }
    }

    /// `Z_2^n`, the grading group of products of `n` superalgebras.
    pub fn z2_power(n: usize) -> Self {
        Self { free_rank: 0, torsion: vec![2; n] }
    }

    /// Re-checks the torsion orders; needed after deserialization.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.free_rank, self.torsion.clone()).map(|_| ())
    }

    /// Number of coordinates of an element.
    pub fn rank(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn order(&self) -> Option<u64> {
        self.is_finite().then(|| self.torsion.iter().map(|&m| m as u64).product())
    }

    pub fn identity(&self) -> GroupElem {
        GroupElem(vec![0; self.rank()])
    }

    pub fn elem(&self, coords: &[i64]) -> Result<GroupElem> {
        if coords.len() != self.rank() {
            return Err(Error::Structural(format!(
                "group element {:?} has {} coordinates, expected {}",
                coords,
                coords.len(),
                self.rank()
            )));
        }
        Ok(self.normalize(coords.to_vec()))
    }

    fn normalize(&self, mut v: Vec<i64>) -> GroupElem {
        for (x, &m) in v[self.free_rank..].iter_mut().zip(&self.torsion) {
            *x = x.rem_euclid(m as i64);
        }
        GroupElem(v)
    }

    pub fn op(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        self.normalize(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect())
    }

    pub fn inverse(&self, a: &GroupElem) -> GroupElem {
        self.normalize(a.0.iter().map(|x| -x).collect())
    }

    /// `a⁻¹·b`.
    pub fn quotient(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        self.op(&self.inverse(a), b)
    }

    pub fn contains(&self, a: &GroupElem) -> bool {
        a.0.len() == self.rank() && self.normalize(a.0.clone()) == *a
    }

    /// All elements of a finite group in lexicographic order.
    pub fn elements(&self) -> Option<Vec<GroupElem>> {
        if !self.is_finite() {
            return None;
        }
        let mut out = vec![Vec::new()];
        for &m in &self.torsion {
            out = out
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (0..m as i64).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        Some(out.into_iter().map(GroupElem).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_normalizes() {
        let g = GradingGroup::new(1, vec![2, 3]).unwrap();
        let a = g.elem(&[2, 1, 2]).unwrap();
        let b = g.elem(&[-2, 3, 5]).unwrap();
        assert_eq!(g.op(&a, &b), g.elem(&[0, 0, 1]).unwrap());
        assert_eq!(g.op(&a, &g.inverse(&a)), g.identity());
        assert_eq!(b, g.elem(&[-2, 1, 2]).unwrap());
    }

    #[test]
    fn rejects_bad_torsion_and_lengths() {
        assert!(GradingGroup::new(0, vec![1]).is_err());
        assert!(GradingGroup::new(0, vec![0]).is_err());
        assert!(GradingGroup::z2().elem(&[0, 1]).is_err());
    }

    #[test]
    fn enumerates_finite_groups() {
        assert_eq!(GradingGroup::z2_power(2).elements().unwrap().len(), 4);
        assert!(GradingGroup::integers().elements().is_none());
        assert_eq!(GradingGroup::trivial().elements().unwrap(), vec![GradingGroup::trivial().identity()]);
    }
}
