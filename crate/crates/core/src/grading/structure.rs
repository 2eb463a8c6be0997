use num::{One, Zero};
use serde_json::{json, Value};

use super::algebra::FiniteGradedAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{unit_vec, Echelon, Matrix, Subspace};
use crate::rational::{q, Q};
use crate::report::{Verdict, VerificationReport};
use crate::univariate::{self, Factorization};

/// The algebra structure on a multiplicatively closed subspace, with the
/// given unit, and its inclusion matrix (`dim A × dim W`).
///
/// The basis is the reduced row-echelon basis of `span`.
pub fn subalgebra(a: &FiniteGradedAlgebra, span: &Subspace, unit: Vec<Q>) -> Result<(FiniteGradedAlgebra, Matrix)> {
    let basis = span.basis();
    let m = basis.len();
    let unit_coords = span.coords(&unit).ok_or_else(|| Error::Precondition("unit does not lie in the subspace".into()))?;
    let mut constants = Vec::new();
    for (r, x) in basis.iter().enumerate() {
        for (s, y) in basis.iter().enumerate() {
            let xy = a.mul(x, y);
            let c = span.coords(&xy).ok_or_else(|| Error::Precondition("subspace is not closed under multiplication".into()))?;
            constants.extend(c.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(t, c)| (r, s, t, c)));
        }
    }
    let mut degrees = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for (r, v) in basis.iter().enumerate() {
        let d = a.degree_of(v).ok_or_else(|| Error::Grading("subspace is not spanned by homogeneous elements".into()))?;
        degrees.push(d);
        let support: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
        labels.push(match support.as_slice() {
            [i] if v[*i].is_one() => a.label(*i).to_string(),
            _ => format!("s{}", r + 1),
        });
    }
    let alg = FiniteGradedAlgebra::new(a.group().clone(), labels, degrees, constants, unit_coords)?;
    Ok((alg, Matrix::from_cols(&basis, a.dim())))
}

/// `A / I` together with the projection and a linear section.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: FiniteGradedAlgebra,
    /// `dim(A/I) × dim A`.
    pub projection: Matrix,
    /// `dim A × dim(A/I)`: representatives are the standard basis vectors
    /// at the non-pivot columns of the ideal's echelon basis.
    pub section: Matrix,
}

/// Quotient by a graded two-sided ideal.
pub fn quotient_algebra(a: &FiniteGradedAlgebra, ideal: &Subspace) -> Result<Quotient> {
    let n = a.dim();
    if let Some(v) = ideal.basis().iter().find(|v| a.degree_of(v).is_none()) {
        return Err(Error::Grading(format!("ideal is not graded: {}", a.describe_vec(v))));
    }
    let pivots = ideal.pivots();
    let reps: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let m = reps.len();
    let project = |v: &[Q]| -> Vec<Q> {
        let r = ideal.reduce(v);
        reps.iter().map(|&c| r[c].clone()).collect()
    };
    let mut constants = Vec::new();
    for (r, &i) in reps.iter().enumerate() {
        for (s, &j) in reps.iter().enumerate() {
            let mut prod = vec![Q::zero(); n];
            for (k, c) in a.product(i, j) {
                prod[*k] = c.clone();
            }
            for (t, c) in project(&prod).into_iter().enumerate() {
                if !c.is_zero() {
                    constants.push((r, s, t, c));
                }
            }
        }
    }
    let labels = reps.iter().map(|&i| a.label(i).to_string()).collect();
    let degrees = reps.iter().map(|&i| a.degree(i).clone()).collect();
    let algebra = FiniteGradedAlgebra::new(a.group().clone(), labels, degrees, constants, project(a.unit()))?;
    let projection = Matrix::from_cols(&(0..n).map(|i| project(&unit_vec(n, i))).collect::<Vec<_>>(), m);
    let section = Matrix::from_cols(&reps.iter().map(|&i| unit_vec(n, i)).collect::<Vec<_>>(), n);
    Ok(Quotient { algebra, projection, section })
}

/// The smallest two-sided ideal containing `gens`.
pub fn ideal_closure(a: &FiniteGradedAlgebra, gens: impl IntoIterator<Item = Vec<Q>>) -> Subspace {
    let n = a.dim();
    let mut ideal = Subspace::zero(n);
    let mut queue: Vec<Vec<Q>> = gens.into_iter().collect();
    while let Some(v) = queue.pop() {
        if !ideal.insert(&v) {
            continue;
        }
        for i in 0..n {
            queue.push(a.mul_basis_left(i, &v));
            queue.push(a.mul_basis_right(&v, i));
        }
    }
    ideal
}

/// `span{x·y : x ∈ U, y ∈ V}`.
pub fn product_space(a: &FiniteGradedAlgebra, u: &Subspace, v: &Subspace) -> Subspace {
    let ub = u.basis();
    let vb = v.basis();
    Subspace::span(a.dim(), ub.iter().flat_map(|x| vb.iter().map(move |y| a.mul(x, y))))
}

/// `[A, A]`, the span of all commutators.
pub fn commutator_space(a: &FiniteGradedAlgebra) -> Subspace {
    let n = a.dim();
    Subspace::span(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| a.commutator(&a.basis_vec(i), &a.basis_vec(j))))
}

/// `{z : zb = bz for all b}`.
#[allow(clippy::needless_range_loop)]
pub fn center(a: &FiniteGradedAlgebra) -> Subspace {
    let n = a.dim();
    let mut eqs = Echelon::new(n);
    'outer: for j in 0..n {
        // Row k of the equations for fixed j: Σ_i z_i ([b_i, b_j])_k = 0.
        let mut rows = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for (k, c) in a.product(i, j) {
                rows[*k][i] += c;
            }
            for (k, c) in a.product(j, i) {
                rows[*k][i] -= c;
            }
        }
        for r in rows {
            eqs.insert(&r);
            if eqs.is_full() {
                break 'outer;
            }
        }
    }
    Subspace::span(n, eqs.nullspace())
}

/// Jacobson radical by the trace criterion: `x ∈ rad` iff `tr L_{xy} = 0` for all `y`.
pub fn radical(a: &FiniteGradedAlgebra) -> Subspace {
    let n = a.dim();
    let traces: Vec<Q> =
        (0..n).map(|k| (0..n).filter_map(|m| a.product(k, m).iter().find(|e| e.0 == m).map(|e| e.1.clone())).sum()).collect();
    let mut form = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let t: Q = a.product(i, j).iter().map(|(k, c)| c * &traces[*k]).sum();
            form.set(j, i, t);
        }
    }
    Subspace::span(n, form.nullspace())
}

/// Outcome of the locality test.
#[derive(Clone, Debug)]
pub struct LocalityReport {
    pub center: Vec<Vec<Q>>,
    pub radical: Vec<Vec<Q>>,
    pub quotient_dim: usize,
    pub quotient_center_dim: usize,
    pub is_local: Verdict,
    pub witness: Option<Value>,
    pub reason: String,
}

impl LocalityReport {
    pub fn to_report(&self) -> VerificationReport {
        let mut r = VerificationReport::new("center_radical_local", self.is_local);
        r.witness = self.witness.clone();
        r.detail("center_dim", self.center.len());
        r.detail("radical_dim", self.radical.len());
        r.detail("semisimple_quotient_dim", self.quotient_dim);
        r.detail("quotient_center_dim", self.quotient_center_dim);
        r.note(self.reason.clone());
        r
    }
}

fn eval_at(s: &FiniteGradedAlgebra, p: &[Q], z: &[Q]) -> Vec<Q> {
    let mut acc = vec![Q::zero(); s.dim()];
    for c in p.iter().rev() {
        acc = s.mul(&acc, z);
        for (x, u) in acc.iter_mut().zip(s.unit()) {
            *x += c * u;
        }
    }
    acc
}

/// Monic minimal polynomial of `z`, coefficients low to high.
pub fn minimal_polynomial(s: &FiniteGradedAlgebra, z: &[Q]) -> Vec<Q> {
    let mut powers = vec![s.unit().to_vec()];
    let mut ech = Echelon::new(s.dim());
    ech.insert(s.unit());
    loop {
        let next = s.mul(powers.last().unwrap(), z);
        if ech.contains(&next) {
            let d = powers.len();
            let mut cols = powers.clone();
            cols.push(next);
            let null = Matrix::from_cols(&cols, s.dim()).nullspace();
            let v = null.into_iter().find(|v| !v[d].is_zero()).expect("dependency exists");
            let lead = v[d].clone();
            return v.into_iter().map(|x| x / &lead).collect();
        }
        ech.insert(&next);
        powers.push(next);
    }
}

fn primitive_central(s: &FiniteGradedAlgebra, zbasis: &[Vec<Q>]) -> Option<(Vec<Q>, Vec<Q>)> {
    let k = zbasis.len();
    let schemes: [fn(usize) -> i64; 4] =
        [|i| i as i64 + 1, |i| ((i + 1) * (i + 1)) as i64, |i| if i % 2 == 0 { i as i64 + 1 } else { -(i as i64) - 1 }, |i| 1 << i.min(40)];
    for f in schemes {
        let mut z = vec![Q::zero(); s.dim()];
        for (i, b) in zbasis.iter().enumerate() {
            let c = q(f(i));
            for (x, y) in z.iter_mut().zip(b) {
                *x += &c * y;
            }
        }
        let p = minimal_polynomial(s, &z);
        if p.len() == k + 1 {
            return Some((z, p));
        }
    }
    None
}

fn labelled(s: &FiniteGradedAlgebra, v: &[Q]) -> Value {
    s.describe_vec(v)
}

/// Looks for a nonzero non-invertible element among basis vectors and
/// `b_i ± b_j`. Idempotents are reported as such.
fn zero_divisor_search(s: &FiniteGradedAlgebra) -> Option<Value> {
    let n = s.dim();
    let mut candidates: Vec<Vec<Q>> = (0..n).map(|i| s.basis_vec(i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            for sign in [1, -1] {
                let mut v = s.basis_vec(i);
                v[j] = q(sign);
                candidates.push(v);
            }
        }
    }
    for x in candidates {
        let null = s.left_mult_matrix(&x).nullspace();
        if let Some(y) = null.first() {
            if s.mul(&x, &x) == x && x != s.unit() {
                return Some(json!({"kind": "idempotent", "element": labelled(s, &x)}));
            }
            return Some(json!({"kind": "zero_divisor", "x": labelled(s, &x), "y": labelled(s, y)}));
        }
    }
    None
}

fn is_square(n: usize) -> bool {
    let r = (n as f64).sqrt().round() as usize;
    r * r == n
}

/// Center, radical, and whether `A/rad` is a division algebra.
pub fn center_radical_local(a: &FiniteGradedAlgebra) -> LocalityReport {
    let center_basis = center(a).into_basis();
    let rad = radical(a);
    let rad_basis = rad.basis();
    let mut report = LocalityReport {
        center: center_basis,
        radical: rad_basis,
        quotient_dim: 0,
        quotient_center_dim: 0,
        is_local: Verdict::Inconclusive,
        witness: None,
        reason: String::new(),
    };
    // The radical of a graded algebra is graded in characteristic 0, but we
    // compute the quotient ungraded so the test never depends on that.
    let s = match quotient_algebra(&a.trivialize(), &rad) {
        Ok(qt) => qt.algebra,
        Err(e) => {
            report.reason = format!("quotient failed: {e}");
            return report;
        }
    };
    report.quotient_dim = s.dim();
    if s.dim() == 0 {
        report.is_local = Verdict::Fail;
        report.reason = "zero algebra is not local".into();
        return report;
    }
    let zb = center(&s).into_basis();
    report.quotient_center_dim = zb.len();
    let field_degree = if zb.len() == 1 {
        1
    } else {
        let Some((z, p)) = primitive_central(&s, &zb) else {
            report.reason = "no primitive central element found".into();
            return report;
        };
        match univariate::factor_once(&p) {
            Factorization::Reducible(g) => {
                let (h, _) = univariate::divmod(&p, &g);
                let (_, u, _) = univariate::ext_gcd(&g, &h);
                let e = eval_at(&s, &univariate::mul(&u, &g), &z);
                report.is_local = Verdict::Fail;
                report.witness = Some(json!({"kind": "central_idempotent", "element": labelled(&s, &e)}));
                report.reason = "center of the semisimple quotient splits".into();
                return report;
            }
            Factorization::Unknown => {
                report.reason = "could not factor the minimal polynomial of a central element".into();
                return report;
            }
            Factorization::Irreducible => zb.len(),
        }
    };
    let relative = s.dim() / field_degree;
    if relative == 1 {
        report.is_local = Verdict::Pass;
        report.reason = "semisimple quotient is a field".into();
        return report;
    }
    if let Some(w) = zero_divisor_search(&s) {
        report.is_local = Verdict::Fail;
        report.witness = Some(w);
        report.reason = "semisimple quotient has zero divisors".into();
        return report;
    }
    report.reason = if is_square(relative) {
        format!("simple quotient of dimension {relative} over its center: no zero divisor found")
    } else {
        format!("quotient of dimension {relative} over its center: undecided")
    };
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::builders::*;

    #[test]
    fn matrix_algebra_is_not_local() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let r = center_radical_local(&m2);
        assert_eq!(r.center.len(), 1);
        assert_eq!(r.radical.len(), 0);
        assert_eq!(r.is_local, Verdict::Fail);
        let w = r.witness.unwrap();
        assert_eq!(w["kind"], "idempotent");
    }

    #[test]
    fn upper_triangular_radical() {
        let ut2 = build_upper_triangular(2).unwrap();
        let r = radical(&ut2);
        assert_eq!(r.basis(), vec![ut2.basis_vec(1)]);
        let ut3 = build_upper_triangular(3).unwrap();
        assert_eq!(commutator_space(&ut3).dim(), 3);
        assert_eq!(center_radical_local(&ut2).is_local, Verdict::Fail);
    }

    #[test]
    fn grassmann_is_local() {
        let e4 = build_grassmann_truncated(4);
        let r = center_radical_local(&e4);
        assert_eq!(r.radical.len(), 15);
        assert_eq!(r.quotient_dim, 1);
        assert_eq!(r.is_local, Verdict::Pass);
        let gens = (1..=4).map(|i| e4.basis_vec(i));
        assert_eq!(ideal_closure(&e4, gens).dim(), 15);
    }

    #[test]
    fn quaternions_are_inconclusive() {
        let h = build_clifford(&[q(-1), q(-1)]).unwrap();
        assert_eq!(center_radical_local(&h).is_local, Verdict::Inconclusive);
        let split = build_clifford(&[q(1), q(1)]).unwrap();
        assert_eq!(center_radical_local(&split).is_local, Verdict::Fail);
    }

    #[test]
    fn commutative_cases() {
        assert_eq!(center_radical_local(&build_function_algebra(2)).is_local, Verdict::Fail);
        assert_eq!(center_radical_local(&build_truncated_polynomial(3).unwrap()).is_local, Verdict::Pass);
        // Q(i) presented as the Clifford algebra on one generator with square -1.
        assert_eq!(center_radical_local(&build_clifford(&[q(-1)]).unwrap()).is_local, Verdict::Pass);
        assert_eq!(center_radical_local(&base_field()).is_local, Verdict::Pass);
    }

    #[test]
    fn quotient_by_radical() {
        let ut2 = build_upper_triangular(2).unwrap();
        let qt = quotient_algebra(&ut2, &radical(&ut2)).unwrap();
        assert_eq!(qt.algebra.dim(), 2);
        assert!(qt.algebra.is_commutative());
        assert_eq!(qt.projection.mul(&qt.section), Matrix::identity(2));
    }
}
