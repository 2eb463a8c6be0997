use num::Zero;
use serde_json::json;

use crate::grading::FiniteGradedAlgebra;
use crate::linalg::{unit_vec, Matrix, Subspace};
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};

/// A finite-dimensional `A`-bimodule given by the actions of basis elements.
#[derive(Clone, Debug)]
pub struct Bimodule {
    pub algebra: FiniteGradedAlgebra,
    pub dim: usize,
    /// `left[i]` is the action `m ↦ b_i·m`.
    pub left: Vec<Matrix>,
    /// `right[i]` is the action `m ↦ m·b_i`.
    pub right: Vec<Matrix>,
}

impl Bimodule {
    /// `A` over itself.
    pub fn regular(a: &FiniteGradedAlgebra) -> Self {
        let n = a.dim();
        let left = (0..n).map(|i| a.left_mult_matrix(&unit_vec(n, i))).collect();
        let right = (0..n).map(|i| a.right_mult_matrix(&unit_vec(n, i))).collect();
        Self { algebra: a.clone(), dim: n, left, right }
    }

    pub fn act_left(&self, a: &[Q], m: &[Q]) -> Vec<Q> {
        combine(&self.left, a, self.dim).mul_vec(m)
    }

    pub fn act_right(&self, m: &[Q], b: &[Q]) -> Vec<Q> {
        combine(&self.right, b, self.dim).mul_vec(m)
    }

    /// Unital actions, both associative, commuting with each other.
    pub fn verify(&self) -> VerificationReport {
        let a = &self.algebra;
        let n = a.dim();
        let mut report = VerificationReport::pass("bimodule");
        let id = Matrix::identity(self.dim);
        if combine(&self.left, a.unit(), self.dim) != id || combine(&self.right, a.unit(), self.dim) != id {
            report.absorb(Verdict::Fail, Some(json!({"axiom": "unital"})));
            return report;
        }
        for i in 0..n {
            for j in 0..n {
                let prod = a.mul(&a.basis_vec(i), &a.basis_vec(j));
                if self.left[i].mul(&self.left[j]) != combine(&self.left, &prod, self.dim) {
                    report.absorb(Verdict::Fail, Some(json!({"axiom": "left_associative", "pair": [a.label(i), a.label(j)]})));
                    return report;
                }
                if self.right[j].mul(&self.right[i]) != combine(&self.right, &prod, self.dim) {
                    report.absorb(Verdict::Fail, Some(json!({"axiom": "right_associative", "pair": [a.label(i), a.label(j)]})));
                    return report;
                }
                if self.left[i].mul(&self.right[j]) != self.right[j].mul(&self.left[i]) {
                    report.absorb(Verdict::Fail, Some(json!({"axiom": "commuting", "pair": [a.label(i), a.label(j)]})));
                    return report;
                }
            }
        }
        report
    }
}

fn combine(actions: &[Matrix], a: &[Q], dim: usize) -> Matrix {
    let mut out = Matrix::zeros(dim, dim);
    for (c, m) in a.iter().zip(actions) {
        if c.is_zero() {
            continue;
        }
        for r in 0..dim {
            for s in 0..dim {
                let x = m.get(r, s);
                if !x.is_zero() {
                    out.add_at(r, s, &(c * x));
                }
            }
        }
    }
    out
}

/// `Ω¹ = ker(m : A ⊗ A → A)` with the outer bimodule structure.
#[derive(Clone, Debug)]
pub struct KaehlerForms {
    pub module: Bimodule,
    /// The kernel inside `A ⊗ A`, where `b_i ⊗ b_j` has index `i·n + j`.
    pub kernel: Subspace,
    /// `n² × dim Ω¹`, columns are the kernel basis.
    pub embedding: Matrix,
    /// Columns `δ(b_j) = 1⊗b_j − b_j⊗1` in kernel coordinates.
    pub delta: Matrix,
}

impl KaehlerForms {
    pub fn dim(&self) -> usize {
        self.module.dim
    }

    /// `δ(a)` as an element of `A ⊗ A`.
    pub fn delta_tensor(&self, a: &[Q]) -> Vec<Q> {
        self.embedding.mul_vec(&self.delta.mul_vec(a))
    }
}

fn tensor(x: &[Q], y: &[Q]) -> Vec<Q> {
    let n = y.len();
    let mut out = vec![Q::zero(); x.len() * n];
    for (i, a) in x.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in y.iter().enumerate() {
            if !b.is_zero() {
                out[i * n + j] = a * b;
            }
        }
    }
    out
}

pub fn kaehler_one_forms(a: &FiniteGradedAlgebra) -> KaehlerForms {
    let n = a.dim();
    let nn = n * n;
    let mut mult = Matrix::zeros(n, nn);
    for i in 0..n {
        for j in 0..n {
            for (k, c) in a.product(i, j) {
                mult.set(*k, i * n + j, c.clone());
            }
        }
    }
    let kernel = Subspace::span(nn, mult.nullspace());
    let basis = kernel.basis();
    let m = basis.len();
    let embedding = Matrix::from_cols(&basis, nn);
    let coords = |v: &[Q]| kernel.coords(v).expect("stays in the kernel");
    let act = |f: &dyn Fn(&[Q]) -> Vec<Q>| -> Matrix { Matrix::from_cols(&basis.iter().map(|w| coords(&f(w))).collect::<Vec<_>>(), m) };
    // a·(x⊗y) = ax⊗y and (x⊗y)·b = x⊗yb, extended linearly.
    let left: Vec<Matrix> = (0..n)
        .map(|i| {
            act(&|w: &[Q]| {
                let mut out = vec![Q::zero(); nn];
                for (p, c) in w.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let (x, y) = (p / n, p % n);
                    for (k, d) in a.product(i, x) {
                        out[k * n + y] += c * d;
                    }
                }
                out
            })
        })
        .collect();
    let right: Vec<Matrix> = (0..n)
        .map(|i| {
            act(&|w: &[Q]| {
                let mut out = vec![Q::zero(); nn];
                for (p, c) in w.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let (x, y) = (p / n, p % n);
                    for (k, d) in a.product(y, i) {
                        out[x * n + k] += c * d;
                    }
                }
                out
            })
        })
        .collect();
    let unit = a.unit().to_vec();
    let delta = Matrix::from_cols(
        &(0..n)
            .map(|j| {
                let b = unit_vec(n, j);
                let d: Vec<Q> = tensor(&unit, &b).iter().zip(tensor(&b, &unit)).map(|(x, y)| x - y).collect();
                coords(&d)
            })
            .collect::<Vec<_>>(),
        m,
    );
    KaehlerForms { module: Bimodule { algebra: a.clone(), dim: m, left, right }, kernel, embedding, delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;

    #[test]
    fn dimensions() {
        for (a, d) in [
            (base_field(), 0),
            (build_truncated_polynomial(2).unwrap(), 2),
            (build_matrix_algebra(2, None).unwrap(), 12),
            (build_upper_triangular(2).unwrap(), 6),
        ] {
            let o = kaehler_one_forms(&a);
            assert_eq!(o.dim(), d);
            assert!(o.module.verify().is_pass());
        }
        assert!(Bimodule::regular(&build_matrix_algebra(2, None).unwrap()).verify().is_pass());
    }

    #[test]
    fn universal_derivation_of_dual_numbers() {
        let a = build_truncated_polynomial(2).unwrap();
        let o = kaehler_one_forms(&a);
        let dt = o.delta_tensor(&a.basis_vec(1));
        // 1⊗t − t⊗1 with 1, t at indices 0, 1.
        assert_eq!(dt, vec![Q::zero(), crate::rational::one(), -crate::rational::one(), Q::zero()]);
    }
}
