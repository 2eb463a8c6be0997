use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::grading::{FiniteGradedAlgebra, GroupElem, HomogeneousElement};
use crate::rational::{fmt_q, Q};

/// A free variable `x_i^g`; `(index, degree)` identifies it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradedVariable {
    pub index: usize,
    pub degree: GroupElem,
}

impl GradedVariable {
    pub fn new(index: usize, degree: GroupElem) -> Self {
        Self { index, degree }
    }
}

impl fmt::Display for GradedVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.degree.coords().iter().map(i64::to_string).collect();
        if d.is_empty() {
            write!(f, "x{}", self.index)
        } else {
            write!(f, "x{}@{}", self.index, d.join(","))
        }
    }
}

pub type Word = Vec<GradedVariable>;

/// An element of the free graded algebra: words with nonzero rational
/// coefficients. The empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedPolynomial {
    terms: BTreeMap<Word, Q>,
}

impl GradedPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Q) -> Self {
        Self::from_terms([(Vec::new(), c)])
    }

    pub fn var(v: GradedVariable) -> Self {
        Self::from_terms([(vec![v], Q::one())])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, Q)>) -> Self {
        let mut p = Self::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, w: Word, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(w.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (w, c) in &other.terms {
            p.add_term(w.clone(), c.clone());
        }
        p
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_terms(self.terms.iter().map(|(w, x)| (w.clone(), x * c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.clone();
                w.extend(v.iter().cloned());
                p.add_term(w, a * b);
            }
        }
        p
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn variables(&self) -> BTreeSet<GradedVariable> {
        self.terms.keys().flatten().cloned().collect()
    }

    pub fn max_index(&self) -> usize {
        self.variables().iter().map(|v| v.index).max().unwrap_or(0)
    }

    /// Occurrence count of each variable in `w`.
    pub fn multidegree(w: &Word) -> BTreeMap<GradedVariable, usize> {
        let mut m = BTreeMap::new();
        for v in w {
            *m.entry(v.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Multilinear: every word is a permutation of the same distinct variables.
    pub fn is_multilinear(&self) -> bool {
        let mut degs = self.terms.keys().map(Self::multidegree);
        let Some(first) = degs.next() else { return true };
        first.values().all(|&c| c == 1) && degs.all(|d| d == first)
    }

    /// `s_n(x_1..x_n) = Σ_σ sign(σ) x_σ(1)…x_σ(n)`.
    pub fn standard(vars: &[GradedVariable]) -> Self {
        let n = vars.len();
        Self::from_terms(super::pattern::permutations(n).into_iter().map(|p| {
            let sign = if super::pattern::inversions(&p).is_multiple_of(2) { Q::one() } else { -Q::one() };
            (p.iter().map(|&i| vars[i].clone()).collect(), sign)
        }))
    }

    /// Left-normed commutator `[...[[y1, y2], y3], ..., yk]`.
    pub fn left_normed(vars: &[GradedVariable]) -> Self {
        let mut it = vars.iter();
        let Some(first) = it.next() else { return Self::zero() };
        it.fold(Self::var(first.clone()), |acc, v| acc.commutator(&Self::var(v.clone())))
    }
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word = if w.is_empty() { "1".to_string() } else { w.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("*") };
                format!("{}*{}", fmt_q(c), word)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The value of `f` at an assignment of homogeneous elements.
pub fn evaluate(
    f: &GradedPolynomial,
    a: &FiniteGradedAlgebra,
    assignment: &BTreeMap<GradedVariable, HomogeneousElement>,
) -> Result<Vec<Q>> {
    for v in f.variables() {
        let Some(x) = assignment.get(&v) else {
            return Err(Error::MissingAssignment(v.to_string()));
        };
        if x.coords().len() != a.dim() {
            return Err(Error::Structural(format!("value of {v} has the wrong length")));
        }
        if x.degree() != &v.degree && !x.is_zero() {
            return Err(Error::DegreeMismatch { variable: v.to_string(), expected: v.degree.to_string(), found: x.degree().to_string() });
        }
    }
    let mut out = vec![Q::zero(); a.dim()];
    for (w, c) in f.terms() {
        let mut acc = a.unit().to_vec();
        for v in w {
            acc = a.mul(&acc, assignment[v].coords());
        }
        for (o, x) in out.iter_mut().zip(acc) {
            *o += c * x;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::rational::q;

    fn x(i: usize, d: &GroupElem) -> GradedVariable {
        GradedVariable::new(i, d.clone())
    }

    #[test]
    fn commutator_on_matrix_units() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let e = m2.group().identity();
        let f = GradedPolynomial::left_normed(&[x(1, &e), x(2, &e)]);
        let assign = BTreeMap::from([(x(1, &e), HomogeneousElement::basis(&m2, 0)), (x(2, &e), HomogeneousElement::basis(&m2, 1))]);
        assert_eq!(evaluate(&f, &m2, &assign).unwrap(), m2.basis_vec(1));
    }

    #[test]
    fn grassmann_anticommutator_and_mismatch() {
        let e4 = build_grassmann_truncated(4);
        let g = e4.group().clone();
        let odd = g.elem(&[1]).unwrap();
        let f = GradedPolynomial::var(x(1, &odd))
            .mul(&GradedPolynomial::var(x(2, &odd)))
            .add(&GradedPolynomial::var(x(2, &odd)).mul(&GradedPolynomial::var(x(1, &odd))));
        let assign = BTreeMap::from([(x(1, &odd), HomogeneousElement::basis(&e4, 1)), (x(2, &odd), HomogeneousElement::basis(&e4, 2))]);
        assert!(evaluate(&f, &e4, &assign).unwrap().iter().all(Zero::is_zero));

        let even = g.identity();
        let c = GradedPolynomial::left_normed(&[x(1, &even), x(2, &even)]);
        let assign = BTreeMap::from([(x(1, &even), HomogeneousElement::basis(&e4, 1)), (x(2, &even), HomogeneousElement::basis(&e4, 2))]);
        assert!(matches!(evaluate(&c, &e4, &assign), Err(Error::DegreeMismatch { .. })));
        assert!(matches!(evaluate(&c, &e4, &BTreeMap::new()), Err(Error::MissingAssignment(_))));
    }

    #[test]
    fn standard_polynomial_shape() {
        let e = GradingGroup::trivial().identity();
        let s3 = GradedPolynomial::standard(&[x(1, &e), x(2, &e), x(3, &e)]);
        assert_eq!(s3.num_terms(), 6);
        assert!(s3.is_multilinear());
        let sq = GradedPolynomial::var(x(1, &e)).mul(&GradedPolynomial::var(x(1, &e)));
        assert!(!sq.is_multilinear());
        assert_eq!(sq.scale(&q(0)), GradedPolynomial::zero());
    }
}
