//! Exact linear algebra over the rationals.
//!
//! Three tools live here:
//!
//! - [`Matrix`], a small dense matrix used for morphisms, actions and
//!   restriction maps;
//! - [`Echelon`], an incrementally maintained sparse reduced row-echelon
//!   form that backs every linear solve and subspace computation;
//! - [`IntEchelon`], a fraction-free integer echelon used by the identity
//!   kernel, where thousands of short constraint rows stream in.
//!
//! Every basis returned to callers is in reduced row-echelon form, so it is
//! canonical for the subspace it spans.

use std::collections::BTreeMap;

use num::{BigInt, One, Zero};

use crate::rational::{normalize_int_row, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must share a length.
    pub fn from_rows(rows: Vec<Vec<Q>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        Self { rows: n, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<Q>], rows: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged matrix columns");
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.data[i * self.cols + j] = x;
    }

    pub fn add_at(&mut self, i: usize, j: usize, x: &Q) {
        let cell = &mut self.data[i * self.cols + j];
        *cell = &*cell + x;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Q>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, &(a * b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).filter(|(a, b)| !a.is_zero() && !b.is_zero()).fold(Q::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    /// Stacks `blocks` vertically.
    pub fn vstack(blocks: &[&Matrix], cols: usize) -> Matrix {
        let mut rows = Vec::new();
        for b in blocks {
            assert_eq!(b.cols, cols);
            rows.extend(b.row_vecs());
        }
        Matrix::from_rows(rows, cols)
    }

    pub fn rank(&self) -> usize {
        self.row_space().dim()
    }

    pub fn row_space(&self) -> Subspace {
        Subspace::span(self.cols, (0..self.rows).map(|i| self.row(i).to_vec()))
    }

    pub fn column_space(&self) -> Subspace {
        Subspace::span(self.rows, (0..self.cols).map(|j| self.col(j)))
    }

    /// Canonical basis of `{v : self · v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let mut ech = Echelon::new(self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i));
        }
        ech.nullspace()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut ech = Echelon::new(2 * n);
        for i in 0..n {
            let mut r = self.row(i).to_vec();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            ech.insert(&r);
        }
        let rows = ech.rows_dense();
        if rows.len() != n || rows.iter().zip(0..n).any(|(r, i)| r[i].is_zero()) {
            return None;
        }
        if ech.pivots() != (0..n).collect::<Vec<_>>() {
            return None;
        }
        Some(Matrix::from_rows(rows.into_iter().map(|r| r[n..].to_vec()).collect(), n))
    }
}

/// Incrementally maintained reduced row-echelon form with sparse rows.
///
/// Rows stay fully reduced after every insertion, so a vector's
/// coordinates in the row space can be read off at the pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<BTreeMap<usize, Q>>,
    pivot_row: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new(), pivot_row: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.pivot_row.keys().copied().collect()
    }

    fn reduce_sparse(&self, mut v: BTreeMap<usize, Q>) -> BTreeMap<usize, Q> {
        let hits: Vec<usize> = v.keys().filter(|c| self.pivot_row.contains_key(c)).copied().collect();
        for c in hits {
            let Some(coef) = v.get(&c).cloned() else { continue };
            let row = &self.rows[self.pivot_row[&c]];
            for (k, x) in row {
                let e = v.entry(*k).or_insert_with(Q::zero);
                *e = &*e - &coef * x;
                if e.is_zero() {
                    v.remove(k);
                }
            }
        }
        v
    }

    fn to_sparse(v: &[Q]) -> BTreeMap<usize, Q> {
        v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
    }

    /// Inserts a row; returns whether the rank grew.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        assert_eq!(v.len(), self.ncols, "echelon row length mismatch");
        self.insert_sparse(Self::to_sparse(v))
    }

    pub fn insert_entries(&mut self, entries: impl IntoIterator<Item = (usize, Q)>) -> bool {
        let mut v: BTreeMap<usize, Q> = BTreeMap::new();
        for (k, x) in entries {
            let e = v.entry(k).or_insert_with(Q::zero);
            *e = &*e + x;
        }
        v.retain(|_, x| !x.is_zero());
        self.insert_sparse(v)
    }

    fn insert_sparse(&mut self, v: BTreeMap<usize, Q>) -> bool {
        let mut v = self.reduce_sparse(v);
        let Some((&p, lead)) = v.iter().next() else { return false };
        let inv = Q::one() / lead;
        for x in v.values_mut() {
            *x = &*x * &inv;
        }
        for row in self.rows.iter_mut() {
            if let Some(coef) = row.get(&p).cloned() {
                for (k, x) in &v {
                    let e = row.entry(*k).or_insert_with(Q::zero);
                    *e = &*e - &coef * x;
                    if e.is_zero() {
                        row.remove(k);
                    }
                }
            }
        }
        self.pivot_row.insert(p, self.rows.len());
        self.rows.push(v);
        true
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce_sparse(Self::to_sparse(v)).is_empty()
    }

    /// Residual of `v` after reduction by the row space.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let r = self.reduce_sparse(Self::to_sparse(v));
        let mut out = vec![Q::zero(); self.ncols];
        for (k, x) in r {
            out[k] = x;
        }
        out
    }

    /// Rows in pivot order (the canonical RREF basis).
    pub fn rows_dense(&self) -> Vec<Vec<Q>> {
        self.pivot_row
            .values()
            .map(|&r| {
                let mut out = vec![Q::zero(); self.ncols];
                for (k, x) in &self.rows[r] {
                    out[*k] = x.clone();
                }
                out
            })
            .collect()
    }

    /// Canonical basis of the solution space of `row · v = 0` over all rows.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let free: Vec<usize> = (0..self.ncols).filter(|c| !self.pivot_row.contains_key(c)).collect();
        let raw = free.iter().map(|&f| {
            let mut v = vec![Q::zero(); self.ncols];
            v[f] = Q::one();
            for (&p, &r) in &self.pivot_row {
                if let Some(x) = self.rows[r].get(&f) {
                    v[p] = -x.clone();
                }
            }
            v
        });
        Subspace::span(self.ncols, raw).into_basis()
    }
}

/// A subspace of `Q^n` held by its reduced row-echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ech: Echelon,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient() == other.ambient() && self.basis() == other.basis()
    }
}

impl Eq for Subspace {}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Self { ech: Echelon::new(n) }
    }

    pub fn full(n: usize) -> Self {
        Self::span(n, (0..n).map(|i| unit_vec(n, i)))
    }

    pub fn span(n: usize, vectors: impl IntoIterator<Item = Vec<Q>>) -> Self {
        let mut ech = Echelon::new(n);
        for v in vectors {
            ech.insert(&v);
        }
        Self { ech }
    }

    pub fn from_echelon(ech: Echelon) -> Self {
        Self { ech }
    }

    pub fn ambient(&self) -> usize {
        self.ech.ncols()
    }

    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn basis(&self) -> Vec<Vec<Q>> {
        self.ech.rows_dense()
    }

    pub fn into_basis(self) -> Vec<Vec<Q>> {
        self.ech.rows_dense()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.ech.pivots()
    }

    pub fn insert(&mut self, v: &[Q]) -> bool {
        self.ech.insert(v)
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.ech.contains(v)
    }

    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        self.ech.reduce(v)
    }

    /// Coordinates of `v` in the RREF basis, or `None` if `v` is outside.
    pub fn coords(&self, v: &[Q]) -> Option<Vec<Q>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots().into_iter().map(|p| v[p].clone()).collect())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis().iter().all(|v| other.contains(v))
    }

    /// First basis vector of `self` not contained in `other`.
    pub fn first_outside(&self, other: &Subspace) -> Option<Vec<Q>> {
        self.basis().into_iter().find(|v| !other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.ambient(), self.basis().into_iter().chain(other.basis()))
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // x = Σ a_i u_i = Σ b_j w_j; solve on the stacked coefficient system.
        let n = self.ambient();
        let u = self.basis();
        let w = other.basis();
        let k = u.len() + w.len();
        let mut rows = vec![vec![Q::zero(); k]; n];
        for (i, v) in u.iter().enumerate() {
            for c in 0..n {
                rows[c][i] = v[c].clone();
            }
        }
        for (j, v) in w.iter().enumerate() {
            for c in 0..n {
                rows[c][u.len() + j] = -v[c].clone();
            }
        }
        let sols = Matrix::from_rows(rows, k).nullspace();
        Subspace::span(
            n,
            sols.into_iter().map(|s| {
                let mut x = vec![Q::zero(); n];
                for (i, v) in u.iter().enumerate() {
                    if !s[i].is_zero() {
                        for c in 0..n {
                            x[c] = &x[c] + &s[i] * &v[c];
                        }
                    }
                }
                x
            }),
        )
    }
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

/// Fraction-free row echelon form over the integers.
///
/// Incoming rows are scaled to primitive integer vectors; elimination
/// uses cross-multiplication followed by content removal, so no rational
/// arithmetic happens until the final nullspace extraction.
#[derive(Clone, Debug)]
pub struct IntEchelon {
    ncols: usize,
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl IntEchelon {
    pub fn new(ncols: usize) -> Self {
        Self { ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Inserts a primitive integer row; returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vec<BigInt>) -> bool {
        debug_assert_eq!(v.len(), self.ncols);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let a = row[p].clone();
            let b = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                *x = &*x * &a - r * &b;
            }
            remove_content(&mut v);
        }
        let Some(lead) = v.iter().position(|x| !x.is_zero()) else { return false };
        normalize_int_row(&mut v, lead);
        let at = self.pivots.partition_point(|&p| p < lead);
        self.pivots.insert(at, lead);
        self.rows.insert(at, v);
        true
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn to_rational_rows(&self) -> Vec<Vec<Q>> {
        self.rows.iter().map(|r| r.iter().map(|x| Q::from_integer(x.clone())).collect()).collect()
    }

    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let mut ech = Echelon::new(self.ncols);
        for r in self.to_rational_rows() {
            ech.insert(&r);
        }
        ech.nullspace()
    }
}

fn remove_content(v: &mut [BigInt]) {
    use num::Integer;
    let g = v.iter().filter(|x| !x.is_zero()).fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return;
    }
    for x in v.iter_mut() {
        *x = &*x / &g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn m(rows: &[&[i64]]) -> Matrix {
        let cols = rows[0].len();
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect(), cols)
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Matrix::identity(2));
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn subspace_ops() {
        let a = Subspace::span(3, vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]);
        let b = Subspace::span(3, vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]);
        assert_eq!(a.intersection(&b).dim(), 1);
        assert_eq!(a.sum(&b).dim(), 3);
        assert_eq!(a.coords(&[q(3), qr(1, 2), q(0)]).unwrap(), vec![q(3), qr(1, 2)]);
        assert!(a.coords(&[q(0), q(0), q(1)]).is_none());
    }

    #[test]
    fn int_echelon_matches_rational_rank() {
        let rows = [[2i64, 4, -2], [1, 2, -1], [0, 3, 3]];
        let mut ie = IntEchelon::new(3);
        for r in rows {
            ie.insert(r.iter().map(|&x| BigInt::from(x)).collect());
        }
        assert_eq!(ie.rank(), 2);
        let ns = ie.nullspace();
        assert_eq!(ns.len(), 1);
    }
}
