use num::{One, Zero};
use serde_json::json;

use super::bimodule::{kaehler_one_forms, Bimodule};
use crate::error::{Error, Result};
use crate::grading::{build_matrix_algebra, center, FiniteGradedAlgebra, GroupElem};
use crate::linalg::{Echelon, Matrix, Subspace};
use crate::rational::{fmt_vec, Q};
use crate::report::{Verdict, VerificationReport};

/// A linear map `A → M` stored as a `dim M × dim A` matrix.
pub type LinearMap = Matrix;

/// The full solution space of the Leibniz system.
#[derive(Clone, Debug)]
pub struct DerivationSpace {
    pub algebra: FiniteGradedAlgebra,
    pub target_dim: usize,
    pub basis: Vec<LinearMap>,
}

impl DerivationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn span(&self) -> Subspace {
        Subspace::span(self.algebra.dim() * self.target_dim, self.basis.iter().map(flatten))
    }

    /// Coordinates of `d` in the basis, if it is a derivation.
    pub fn coords(&self, d: &LinearMap) -> Option<Vec<Q>> {
        coords_in(&self.basis, d)
    }
}

pub(crate) fn flatten(m: &Matrix) -> Vec<Q> {
    (0..m.rows()).flat_map(|r| m.row(r).to_vec()).collect()
}

fn unflatten(v: &[Q], rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows(v.chunks(cols.max(1)).take(rows).map(|c| c.to_vec()).collect(), cols)
}

/// Coordinates of `target` in the span of `basis` (independent maps).
pub(crate) fn coords_in(basis: &[Matrix], target: &Matrix) -> Option<Vec<Q>> {
    let k = basis.len();
    let len = target.rows() * target.cols();
    let mut ech = Echelon::new(len + k);
    for (t, b) in basis.iter().enumerate() {
        let mut row = flatten(b);
        row.extend((0..k).map(|s| if s == t { Q::one() } else { Q::zero() }));
        ech.insert(&row);
    }
    let mut probe = flatten(target);
    probe.extend(std::iter::repeat_n(Q::zero(), k));
    let red = ech.reduce(&probe);
    if red[..len].iter().any(|x| !x.is_zero()) {
        return None;
    }
    Some(red[len..].iter().map(|x| -x.clone()).collect())
}

/// Leibniz rows for `D(b_i b_j) = D(b_i)·b_j + b_i·D(b_j)`, with unknown
/// `D[r][c]` at index `r·n + c`, restricted to `allowed` unknowns.
fn leibniz_space(a: &FiniteGradedAlgebra, m: &Bimodule, allowed: &dyn Fn(usize, usize) -> bool) -> Vec<LinearMap> {
    let n = a.dim();
    let dm = m.dim;
    let mut eqs = Echelon::new(dm * n);
    for r in 0..dm {
        for c in 0..n {
            if !allowed(r, c) {
                eqs.insert_entries([(r * n + c, Q::one())]);
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for r in 0..dm {
                let mut row: Vec<(usize, Q)> = a.product(i, j).iter().map(|(k, c)| (r * n + k, c.clone())).collect();
                for s in 0..dm {
                    let x = m.right[j].get(r, s);
                    if !x.is_zero() {
                        row.push((s * n + i, -x.clone()));
                    }
                    let y = m.left[i].get(r, s);
                    if !y.is_zero() {
                        row.push((s * n + j, -y.clone()));
                    }
                }
                eqs.insert_entries(row);
            }
        }
    }
    eqs.nullspace().into_iter().map(|v| unflatten(&v, dm, n)).collect()
}

pub fn derivations(a: &FiniteGradedAlgebra, m: &Bimodule) -> DerivationSpace {
    DerivationSpace { algebra: a.clone(), target_dim: m.dim, basis: leibniz_space(a, m, &|_, _| true) }
}

/// Does `d` satisfy the Leibniz rule on all basis pairs?
pub fn is_derivation(a: &FiniteGradedAlgebra, m: &Bimodule, d: &LinearMap) -> bool {
    let n = a.dim();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let lhs = d.mul_vec(&a.mul(&a.basis_vec(i), &a.basis_vec(j)));
            let di = d.col(i);
            let dj = d.col(j);
            let rhs: Vec<Q> = m.right[j].mul_vec(&di).into_iter().zip(m.left[i].mul_vec(&dj)).map(|(x, y)| x + y).collect();
            lhs == rhs
        })
    })
}

/// `ad(s) : m ↦ s·m − m·s` on `A` itself.
pub fn inner_derivation(a: &FiniteGradedAlgebra, s: &[Q]) -> LinearMap {
    a.left_mult_matrix(s).sub(&a.right_mult_matrix(s))
}

/// Data of `0 → HH⁰ → A → Der(A, A) → HH¹ → 0`.
#[derive(Clone, Debug)]
pub struct HochschildLow {
    pub center: Vec<Vec<Q>>,
    pub derivations: DerivationSpace,
    /// Canonical basis of `Inn(A)`.
    pub inner: Vec<LinearMap>,
    pub hh1: usize,
    pub report: VerificationReport,
}

pub fn hochschild_low(a: &FiniteGradedAlgebra) -> HochschildLow {
    let n = a.dim();
    let der = derivations(a, &Bimodule::regular(a));
    let z = center(a).into_basis();
    let inn_space = Subspace::span(n * n, (0..n).map(|i| flatten(&inner_derivation(a, &a.basis_vec(i)))));
    let inner: Vec<LinearMap> = inn_space.basis().iter().map(|v| unflatten(v, n, n)).collect();
    let hh1 = der.dim() - inner.len();
    let mut report = VerificationReport::pass("hochschild_low");
    let exact = n - z.len() == inner.len();
    let contained = inner.iter().all(|d| der.coords(d).is_some());
    report.absorb(Verdict::from_bool(exact && contained), Some(json!({"exact_at_A": exact, "inner_are_derivations": contained})));
    report.detail("hh0", z.len());
    report.detail("dim_algebra", n);
    report.detail("dim_der", der.dim());
    report.detail("dim_inn", inner.len());
    report.detail("hh1", hh1);
    HochschildLow { center: z, derivations: der, inner, hh1, report }
}

/// `Der(A, A)` against its description `Hom_{A-bimod}(Ω¹, A)`.
#[derive(Clone, Debug)]
pub struct TangentObject {
    pub derivations: DerivationSpace,
    /// Bimodule maps `Ω¹ → A`, as `dim A × dim Ω¹` matrices.
    pub bimodule_maps: Vec<Matrix>,
    /// `φ ↦ φ∘δ` in the two bases.
    pub forward: Matrix,
    pub inverse: Option<Matrix>,
    pub report: VerificationReport,
}

pub fn tangent_object(a: &FiniteGradedAlgebra) -> TangentObject {
    let n = a.dim();
    let omega = kaehler_one_forms(a);
    let reg = Bimodule::regular(a);
    let der = derivations(a, &reg);
    let m = omega.dim();
    // φ(b_i·ω) = b_i·φ(ω) and φ(ω·b_i) = φ(ω)·b_i, unknown φ[r][c] at r·m + c.
    let mut eqs = Echelon::new(n * m);
    for i in 0..n {
        for (act_o, act_a) in [(&omega.module.left[i], &reg.left[i]), (&omega.module.right[i], &reg.right[i])] {
            for c in 0..m {
                for r in 0..n {
                    let mut row: Vec<(usize, Q)> = Vec::new();
                    for k in 0..m {
                        let x = act_o.get(k, c);
                        if !x.is_zero() {
                            row.push((r * m + k, x.clone()));
                        }
                    }
                    for s in 0..n {
                        let y = act_a.get(r, s);
                        if !y.is_zero() {
                            row.push((s * m + c, -y.clone()));
                        }
                    }
                    eqs.insert_entries(row);
                }
            }
        }
    }
    let maps: Vec<Matrix> = eqs.nullspace().into_iter().map(|v| unflatten(&v, n, m)).collect();
    let images: Vec<Option<Vec<Q>>> = maps.iter().map(|phi| der.coords(&phi.mul(&omega.delta))).collect();
    let mut report = VerificationReport::pass("tangent_object");
    report.detail("dim_der", der.dim());
    report.detail("dim_bimodule_maps", maps.len());
    report.detail("dim_omega1", m);
    if let Some(k) = images.iter().position(Option::is_none) {
        report.absorb(Verdict::Fail, Some(json!({"reason": "φ∘δ is not a derivation", "map": k})));
        return TangentObject { derivations: der, bimodule_maps: maps, forward: Matrix::zeros(0, 0), inverse: None, report };
    }
    let forward = Matrix::from_cols(&images.into_iter().map(Option::unwrap).collect::<Vec<_>>(), der.dim());
    let inverse = if forward.rows() == forward.cols() { forward.inverse() } else { None };
    match &inverse {
        Some(inv) => {
            let round = inv.mul(&forward) == Matrix::identity(maps.len()) && forward.mul(inv) == Matrix::identity(der.dim());
            report.absorb(Verdict::from_bool(round), Some(json!({"reason": "round trip"})));
        }
        None => report.absorb(
            Verdict::Fail,
            Some(json!({"reason": "φ ↦ φ∘δ is not invertible", "rank": forward.rank(), "shape": [forward.rows(), forward.cols()]})),
        ),
    }
    TangentObject { derivations: der, bimodule_maps: maps, forward, inverse, report }
}

impl TangentObject {
    /// The bimodule map `Ω¹ → A` corresponding to a derivation.
    pub fn bimodule_map_of(&self, d: &LinearMap) -> Option<Matrix> {
        let c = self.derivations.coords(d)?;
        let phi = self.inverse.as_ref()?.mul_vec(&c);
        let (rows, cols) = self.bimodule_maps.first().map(|m| (m.rows(), m.cols()))?;
        let mut out = Matrix::zeros(rows, cols);
        for (x, m) in phi.iter().zip(&self.bimodule_maps) {
            for r in 0..rows {
                for s in 0..cols {
                    out.add_at(r, s, &(x * m.get(r, s)));
                }
            }
        }
        Some(out)
    }
}

/// Derivations `D` with `D(A^g) ⊆ A^{gh}`.
pub fn graded_derivations(a: &FiniteGradedAlgebra, h: &GroupElem) -> DerivationSpace {
    let g = a.group();
    let allowed = |r: usize, c: usize| a.degree(r) == &g.op(a.degree(c), h);
    DerivationSpace { algebra: a.clone(), target_dim: a.dim(), basis: leibniz_space(a, &Bimodule::regular(a), &allowed) }
}

/// Homogeneous components over every shift `h` that some pair of basis
/// degrees realizes, with a check that they add up to `Der(A, A)`.
pub fn graded_decomposition(a: &FiniteGradedAlgebra) -> (Vec<(GroupElem, DerivationSpace)>, VerificationReport) {
    let g = a.group();
    let mut shifts: Vec<GroupElem> = a.degrees().iter().flat_map(|x| a.degrees().iter().map(move |y| g.quotient(x, y))).collect();
    shifts.sort();
    shifts.dedup();
    let parts: Vec<(GroupElem, DerivationSpace)> = shifts
        .into_iter()
        .map(|h| {
            let d = graded_derivations(a, &h);
            (h, d)
        })
        .filter(|(_, d)| d.dim() > 0)
        .collect();
    let full = derivations(a, &Bimodule::regular(a));
    let total: usize = parts.iter().map(|(_, d)| d.dim()).sum();
    let sum = Subspace::span(a.dim() * a.dim(), parts.iter().flat_map(|(_, d)| d.basis.iter().map(flatten)));
    let mut report = VerificationReport::new("graded_derivations", Verdict::from_bool(total == full.dim() && sum.dim() == total));
    report.detail("components", parts.iter().map(|(h, d)| json!({"shift": h.to_string(), "dim": d.dim()})).collect::<Vec<_>>());
    report.detail("dim_der", full.dim());
    (parts, report)
}

/// Checks `Der(M_r) ≅ 𝔰𝔩_r` through `ad`, comparing bracket structure
/// constants of the computed derivation basis with those of its preimages.
pub fn compare_with_sl(r: usize) -> Result<VerificationReport> {
    let a = build_matrix_algebra(r, None)?;
    let n = a.dim();
    let hh = hochschild_low(&a);
    let der = &hh.derivations;
    let mut report = VerificationReport::pass("matrix_tangent_sl");
    report.detail("r", r);
    report.detail("dim_der", der.dim());
    report.detail("hh1", hh.hh1);
    if hh.hh1 != 0 || der.dim() != r * r - 1 {
        report.absorb(Verdict::Fail, Some(json!({"reason": "dimension", "dim_der": der.dim(), "hh1": hh.hh1})));
        return Ok(report);
    }
    // sl_r basis: e_ij (i ≠ j), then e_ii − e_{i+1,i+1}.
    let mut sl: Vec<Vec<Q>> = Vec::new();
    for i in 0..r {
        for j in 0..r {
            if i != j {
                sl.push(crate::linalg::unit_vec(n, i * r + j));
            }
        }
    }
    for i in 0..r - 1 {
        let mut v = vec![Q::zero(); n];
        v[i * r + i] = Q::one();
        v[(i + 1) * r + i + 1] = -Q::one();
        sl.push(v);
    }
    let ads: Vec<Matrix> = sl.iter().map(|x| inner_derivation(&a, x)).collect();
    // X_k = ad⁻¹(D_k) expressed in the sl basis.
    let pre: Vec<Vec<Q>> = der
        .basis
        .iter()
        .map(|d| coords_in(&ads, d).ok_or_else(|| Error::Precondition("derivation is not inner".into())))
        .collect::<Result<_>>()?;
    let xs: Vec<Vec<Q>> = pre
        .iter()
        .map(|c| {
            let mut v = vec![Q::zero(); n];
            for (x, s) in c.iter().zip(&sl) {
                for (t, y) in s.iter().enumerate() {
                    v[t] += x * y;
                }
            }
            v
        })
        .collect();
    let k = der.dim();
    let mut constants = Vec::new();
    for p in 0..k {
        for q in 0..k {
            let dp = &der.basis[p];
            let dq = &der.basis[q];
            let bracket = dp.mul(dq).sub(&dq.mul(dp));
            let lhs = der.coords(&bracket).ok_or_else(|| Error::Precondition("bracket left Der".into()))?;
            let comm = a.commutator(&xs[p], &xs[q]);
            let rhs =
                coords_in(&xs.iter().map(|x| Matrix::from_rows(vec![x.clone()], n)).collect::<Vec<_>>(), &Matrix::from_rows(vec![comm], n))
                    .ok_or_else(|| Error::Precondition("bracket left sl".into()))?;
            if lhs != rhs {
                report.absorb(Verdict::Fail, Some(json!({"pair": [p, q], "der": fmt_vec(&lhs), "sl": fmt_vec(&rhs)})));
                return Ok(report);
            }
            constants.push(json!({"pair": [p, q], "coords": fmt_vec(&lhs)}));
        }
    }
    report.detail("structure_constants", constants.len());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::rational::q;

    #[test]
    fn derivation_dimensions() {
        let dual = build_truncated_polynomial(2).unwrap();
        assert_eq!(derivations(&dual, &Bimodule::regular(&dual)).dim(), 1);
        let m2 = build_matrix_algebra(2, None).unwrap();
        assert_eq!(derivations(&m2, &Bimodule::regular(&m2)).dim(), 3);
        let f = base_field();
        assert_eq!(derivations(&f, &Bimodule::regular(&f)).dim(), 0);
    }

    #[test]
    fn hochschild_examples() {
        assert_eq!(hochschild_low(&build_truncated_polynomial(2).unwrap()).hh1, 1);
        for l in 2..=4 {
            let h = hochschild_low(&build_upper_triangular(l).unwrap());
            assert_eq!(h.hh1, 0);
            assert_eq!(h.derivations.dim(), l * (l + 1) / 2 - 1);
            assert!(h.report.is_pass());
        }
        for r in 2..=3 {
            assert!(compare_with_sl(r).unwrap().is_pass());
        }
    }

    #[test]
    fn tangent_round_trip() {
        for a in [base_field(), build_matrix_algebra(2, None).unwrap(), build_truncated_polynomial(2).unwrap()] {
            let t = tangent_object(&a);
            assert!(t.report.is_pass(), "{}", t.report.to_json());
        }
        let m2 = build_matrix_algebra(2, None).unwrap();
        let t = tangent_object(&m2);
        assert_eq!(t.bimodule_maps.len(), 3);
        let zero = Matrix::zeros(4, 4);
        let phi = t.bimodule_map_of(&zero).unwrap();
        assert!(phi.is_zero());
    }

    #[test]
    fn graded_components_of_e2() {
        let e2 = build_grassmann_truncated(2);
        let g = e2.group().clone();
        let mut d = Matrix::zeros(4, 4);
        d.set(1, 1, q(1));
        d.set(2, 2, q(1));
        d.set(3, 3, q(2));
        let even = graded_derivations(&e2, &g.identity());
        assert!(even.coords(&d).is_some());
        let mut contraction = Matrix::zeros(4, 4);
        contraction.set(0, 1, q(1));
        assert!(!is_derivation(&e2, &Bimodule::regular(&e2), &contraction));
        let (_, report) = graded_decomposition(&e2);
        assert!(report.is_pass());
    }
}
