use std::collections::BTreeSet;

use num::Zero;
use serde_json::{json, Value};

use super::group::{GradingGroup, GroupElem};
use crate::error::{Error, Result};
use crate::linalg::{unit_vec, Matrix};
use crate::rational::{fmt_vec, Q};
use crate::report::VerificationReport;

/// A finite-dimensional G-graded algebra given by structure constants.
///
/// `b_i · b_j = Σ_k c_ij^k b_k`. The constants are stored sparsely per pair
/// `(i, j)` with `k` ascending, so iteration order is canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGradedAlgebra {
    group: GradingGroup,
    labels: Vec<String>,
    degrees: Vec<GroupElem>,
    table: Vec<Vec<(usize, Q)>>,
    unit: Vec<Q>,
}

impl FiniteGradedAlgebra {
    /// Assembles an algebra, checking only shapes and index ranges.
    /// Axioms are checked separately by [`validate_algebra`].
    pub fn new(
        group: GradingGroup,
        labels: Vec<String>,
        degrees: Vec<GroupElem>,
        constants: impl IntoIterator<Item = (usize, usize, usize, Q)>,
        unit: Vec<Q>,
    ) -> Result<Self> {
        group.validate()?;
        let n = labels.len();
        if degrees.len() != n {
            return Err(Error::Structural(format!("{} labels but {} degrees", n, degrees.len())));
        }
        if unit.len() != n {
            return Err(Error::Structural(format!("unit has {} coordinates, expected {n}", unit.len())));
        }
        if let Some(d) = degrees.iter().find(|d| !group.contains(d)) {
            return Err(Error::Structural(format!("degree {d} is not a normalized element of the grading group")));
        }
        let mut table: Vec<Vec<(usize, Q)>> = vec![Vec::new(); n * n];
        for (i, j, k, c) in constants {
            if i >= n || j >= n || k >= n {
                return Err(Error::Structural(format!("structure constant index ({i},{j},{k}) out of range for dimension {n}")));
            }
            if c.is_zero() {
                continue;
            }
            let cell = &mut table[i * n + j];
            match cell.binary_search_by_key(&k, |e| e.0) {
                Ok(p) => cell[p].1 += c,
                Err(p) => cell.insert(p, (k, c)),
            }
        }
        for cell in table.iter_mut() {
            cell.retain(|(_, c)| !c.is_zero());
        }
        Ok(Self { group, labels, degrees, table, unit })
    }

    /// The zero algebra over `group`.
    pub fn zero(group: GradingGroup) -> Self {
        Self { group, labels: Vec::new(), degrees: Vec::new(), table: Vec::new(), unit: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn group(&self) -> &GradingGroup {
        &self.group
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn degrees(&self) -> &[GroupElem] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> &GroupElem {
        &self.degrees[i]
    }

    pub fn unit(&self) -> &[Q] {
        &self.unit
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Q> {
        unit_vec(self.dim(), i)
    }

    /// Nonzero `(k, c_ij^k)` with `k` ascending.
    pub fn product(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.table[i * self.dim() + j]
    }

    /// All nonzero constants `(i, j, k, c)` in lexicographic order.
    pub fn constants(&self) -> impl Iterator<Item = (usize, usize, usize, &Q)> + '_ {
        let n = self.dim();
        self.table.iter().enumerate().flat_map(move |(ij, cell)| cell.iter().map(move |(k, c)| (ij / n, ij % n, *k, c)))
    }

    pub fn mul(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                let xy = x * y;
                for (k, c) in self.product(i, j) {
                    out[*k] += &xy * c;
                }
            }
        }
        out
    }

    /// `b_i · v`.
    pub fn mul_basis_left(&self, i: usize, v: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim()];
        for (j, y) in v.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
            for (k, c) in self.product(i, j) {
                out[*k] += y * c;
            }
        }
        out
    }

    /// `v · b_j`.
    pub fn mul_basis_right(&self, v: &[Q], j: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim()];
        for (i, x) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (k, c) in self.product(i, j) {
                out[*k] += x * c;
            }
        }
        out
    }

    pub fn commutator(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let ab = self.mul(a, b);
        let ba = self.mul(b, a);
        ab.iter().zip(&ba).map(|(x, y)| x - y).collect()
    }

    /// Matrix of `x ↦ a·x`.
    pub fn left_mult_matrix(&self, a: &[Q]) -> Matrix {
        let n = self.dim();
        let cols: Vec<Vec<Q>> = (0..n).map(|j| self.mul_basis_right(a, j)).collect();
        Matrix::from_cols(&cols, n)
    }

    /// Matrix of `x ↦ x·a`.
    pub fn right_mult_matrix(&self, a: &[Q]) -> Matrix {
        let n = self.dim();
        let cols: Vec<Vec<Q>> = (0..n).map(|i| self.mul_basis_left(i, a)).collect();
        Matrix::from_cols(&cols, n)
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i + 1..n).all(|j| self.product(i, j) == self.product(j, i)))
    }

    pub fn is_trivially_graded(&self) -> bool {
        let e = self.group.identity();
        self.degrees.iter().all(|d| *d == e)
    }

    /// The same algebra with every basis vector in degree `1_G` of the trivial group.
    pub fn trivialize(&self) -> Self {
        let g = GradingGroup::trivial();
        Self {
            degrees: vec![g.identity(); self.dim()],
            group: g,
            labels: self.labels.clone(),
            table: self.table.clone(),
            unit: self.unit.clone(),
        }
    }

    /// Replaces the grading; fails when the new degrees are incompatible
    /// with the products.
    pub fn regrade(&self, group: GradingGroup, degrees: Vec<GroupElem>) -> Result<Self> {
        let a = Self { group, labels: self.labels.clone(), degrees, table: self.table.clone(), unit: self.unit.clone() };
        if a.degrees.len() != a.dim() {
            return Err(Error::Structural("regrade: wrong number of degrees".into()));
        }
        if let Some(d) = a.degrees.iter().find(|d| !a.group.contains(d)) {
            return Err(Error::Structural(format!("regrade: {d} is not in the grading group")));
        }
        if let Some(w) = a.grading_violation() {
            return Err(Error::Grading(format!("regrade incompatible at {}", w)));
        }
        if a.unit_degree_violation().is_some() {
            return Err(Error::Grading("regrade puts the unit outside degree 1_G".into()));
        }
        Ok(a)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.dim());
        self.labels = labels;
        self
    }

    /// The degree of `v` when it is homogeneous and nonzero.
    pub fn degree_of(&self, v: &[Q]) -> Option<GroupElem> {
        let mut degs = v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| &self.degrees[i]);
        let first = degs.next()?;
        degs.all(|d| d == first).then(|| first.clone())
    }

    /// Whether `v` is homogeneous (zero counts as homogeneous of every degree).
    pub fn is_homogeneous(&self, v: &[Q]) -> bool {
        v.iter().all(Zero::is_zero) || self.degree_of(v).is_some()
    }

    pub fn supported_degrees(&self) -> BTreeSet<GroupElem> {
        self.degrees.iter().cloned().collect()
    }

    pub fn indices_of_degree(&self, g: &GroupElem) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == *g).collect()
    }

    /// Dimensions of the homogeneous components, by degree.
    pub fn component_dims(&self) -> Vec<(GroupElem, usize)> {
        self.supported_degrees()
            .into_iter()
            .map(|g| {
                let n = self.indices_of_degree(&g).len();
                (g, n)
            })
            .collect()
    }

    pub fn describe_vec(&self, v: &[Q]) -> Value {
        let terms: Vec<Value> =
            v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| json!([crate::rational::fmt_q(x), self.labels[i]])).collect();
        Value::Array(terms)
    }

    pub fn coords_json(v: &[Q]) -> Value {
        json!(fmt_vec(v))
    }

    pub(crate) fn grading_violation(&self) -> Option<String> {
        for (i, j, k, _) in self.constants() {
            let want = self.group.op(&self.degrees[i], &self.degrees[j]);
            if self.degrees[k] != want {
                return Some(format!("({},{}) -> {}", self.labels[i], self.labels[j], self.labels[k]));
            }
        }
        None
    }

    fn unit_degree_violation(&self) -> Option<usize> {
        let e = self.group.identity();
        (0..self.dim()).find(|&i| !self.unit[i].is_zero() && self.degrees[i] != e)
    }

    fn associator_nonzero(&self, i: usize, j: usize, k: usize) -> bool {
        let n = self.dim();
        let mut left = vec![Q::zero(); n];
        for (p, c) in self.product(i, j) {
            for (q, d) in self.product(*p, k) {
                left[*q] += c * d;
            }
        }
        for (p, c) in self.product(j, k) {
            for (q, d) in self.product(i, *p) {
                left[*q] -= c * d;
            }
        }
        left.iter().any(|x| !x.is_zero())
    }

    /// First `(i, j, k)` in lexicographic order with `(b_i b_j) b_k ≠ b_i (b_j b_k)`.
    pub fn associativity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.associator_nonzero(i, j, k) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// Every violating triple; used by diagnostics and tests.
    pub fn associativity_violations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.associator_nonzero(i, j, k) {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }
}

/// Checks associativity, grading compatibility and the unit, in that order.
pub fn validate_algebra(a: &FiniteGradedAlgebra) -> VerificationReport {
    let n = a.dim();
    let labels = |t: &[usize]| -> Value { json!(t.iter().map(|&i| a.label(i)).collect::<Vec<_>>()) };
    let mut report = if let Some((i, j, k)) = a.associativity_violation() {
        VerificationReport::fail("validate_algebra", json!({"axiom": "associativity", "triple": [i, j, k], "labels": labels(&[i, j, k])}))
    } else if let Some((i, j, k, _)) = a.constants().find(|(i, j, k, _)| a.degree(*k) != &a.group().op(a.degree(*i), a.degree(*j))) {
        VerificationReport::fail("validate_algebra", json!({"axiom": "grading", "triple": [i, j, k], "labels": labels(&[i, j, k])}))
    } else if let Some(i) = unit_violation(a) {
        VerificationReport::fail("validate_algebra", json!({"axiom": "unit", "basis": i, "label": a.label(i)}))
    } else if let Some(i) = a.unit_degree_violation() {
        VerificationReport::fail("validate_algebra", json!({"axiom": "unit_degree", "basis": i, "label": a.label(i)}))
    } else {
        VerificationReport::pass("validate_algebra")
    };
    report.detail("dim", n);
    let comps: Vec<Value> = a.component_dims().into_iter().map(|(g, d)| json!([g.to_string(), d])).collect();
    report.detail("component_dims", comps);
    report
}

fn unit_violation(a: &FiniteGradedAlgebra) -> Option<usize> {
    let u = a.unit();
    (0..a.dim()).find(|&i| {
        let e = a.basis_vec(i);
        a.mul(u, &e) != e || a.mul(&e, u) != e
    })
}

/// A nonzero-or-zero element known to lie in a single homogeneous component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousElement {
    coords: Vec<Q>,
    degree: GroupElem,
}

impl HomogeneousElement {
    pub fn new(a: &FiniteGradedAlgebra, coords: Vec<Q>, degree: GroupElem) -> Result<Self> {
        if coords.len() != a.dim() {
            return Err(Error::Structural(format!("element has {} coordinates, algebra has dimension {}", coords.len(), a.dim())));
        }
        if !a.group().contains(&degree) {
            return Err(Error::Structural(format!("degree {degree} is not in the grading group")));
        }
        if let Some(i) = (0..a.dim()).find(|&i| !coords[i].is_zero() && a.degree(i) != &degree) {
            return Err(Error::Grading(format!("coordinate on {} has degree {}, not {}", a.label(i), a.degree(i), degree)));
        }
        Ok(Self { coords, degree })
    }

    /// Infers the degree; the zero vector gets degree `1_G`.
    pub fn from_coords(a: &FiniteGradedAlgebra, coords: Vec<Q>) -> Result<Self> {
        let degree = if coords.iter().all(Zero::is_zero) {
            a.group().identity()
        } else {
            a.degree_of(&coords).ok_or_else(|| Error::Grading("element is not homogeneous".into()))?
        };
        Self::new(a, coords, degree)
    }

    pub fn basis(a: &FiniteGradedAlgebra, i: usize) -> Self {
        Self { coords: a.basis_vec(i), degree: a.degree(i).clone() }
    }

    pub fn unit(a: &FiniteGradedAlgebra) -> Self {
        Self { coords: a.unit().to_vec(), degree: a.group().identity() }
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn degree(&self) -> &GroupElem {
        &self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }
}

/// Coordinates of `Σ c_i b_i` from a list of `(label, coefficient)` terms.
pub fn element_from_terms(a: &FiniteGradedAlgebra, terms: &[(&str, Q)]) -> Result<Vec<Q>> {
    let mut v = vec![Q::zero(); a.dim()];
    for (label, c) in terms {
        let i =
            a.labels().iter().position(|l| l == label).ok_or_else(|| Error::Structural(format!("no basis element labelled {label:?}")))?;
        v[i] += c;
    }
    Ok(v)
}
