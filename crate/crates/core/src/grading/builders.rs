use num::{One, Zero};

use super::algebra::{FiniteGradedAlgebra, HomogeneousElement};
use super::group::{GradingGroup, GroupElem};
use super::structure::subalgebra;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Subspace};
use crate::rational::{one, Q};

fn matrix_unit_label(n: usize, i: usize, j: usize) -> String {
    if n < 10 {
        format!("e{}{}", i + 1, j + 1)
    } else {
        format!("e{},{}", i + 1, j + 1)
    }
}

/// The base field `F`, graded by `group` in degree `1_G`.
pub fn base_field_in(group: GradingGroup) -> FiniteGradedAlgebra {
    let e = group.identity();
    FiniteGradedAlgebra::new(group, vec!["1".into()], vec![e], [(0, 0, 0, one())], vec![one()]).expect("base field is well formed")
}

pub fn base_field() -> FiniteGradedAlgebra {
    base_field_in(GradingGroup::trivial())
}

/// `M_n(F)` on matrix units `e_ij` (index `i·n + j`), optionally graded by
/// an explicit degree per matrix unit.
pub fn build_matrix_algebra(n: usize, grading: Option<(GradingGroup, Vec<GroupElem>)>) -> Result<FiniteGradedAlgebra> {
    if n == 0 {
        return Err(Error::Precondition("matrix size must be positive".into()));
    }
    let mut constants = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                constants.push((i * n + j, j * n + l, i * n + l, one()));
            }
        }
    }
    let labels = (0..n * n).map(|x| matrix_unit_label(n, x / n, x % n)).collect();
    let mut unit = vec![Q::zero(); n * n];
    for i in 0..n {
        unit[i * n + i] = one();
    }
    let g = GradingGroup::trivial();
    let a = FiniteGradedAlgebra::new(g.clone(), labels, vec![g.identity(); n * n], constants, unit)?;
    match grading {
        None => Ok(a),
        Some((group, degrees)) => {
            if degrees.len() != n * n {
                return Err(Error::Structural(format!("degree assignment has {} entries, expected {}", degrees.len(), n * n)));
            }
            a.regrade(group, degrees)
        }
    }
}

/// Degrees of the elementary grading `deg(e_ij) = g_i⁻¹ g_j`.
pub fn elementary_grading(group: &GradingGroup, g: &[GroupElem]) -> Vec<GroupElem> {
    let n = g.len();
    (0..n * n).map(|x| group.quotient(&g[x / n], &g[x % n])).collect()
}

/// Upper triangular `ℓ × ℓ` matrices, basis `e_ij` (`i ≤ j`) in row-major order.
pub fn build_upper_triangular(l: usize) -> Result<FiniteGradedAlgebra> {
    if l == 0 {
        return Err(Error::Precondition("size must be positive".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..l).flat_map(|i| (i..l).map(move |j| (i, j))).collect();
    let index = |i: usize, j: usize| pairs.iter().position(|&p| p == (i, j)).unwrap();
    let mut constants = Vec::new();
    for &(i, j) in &pairs {
        for m in j..l {
            constants.push((index(i, j), index(j, m), index(i, m), one()));
        }
    }
    let mut unit = vec![Q::zero(); pairs.len()];
    for i in 0..l {
        unit[index(i, i)] = one();
    }
    let labels = pairs.iter().map(|&(i, j)| matrix_unit_label(l, i, j)).collect();
    let g = GradingGroup::trivial();
    FiniteGradedAlgebra::new(g.clone(), labels, vec![g.identity(); pairs.len()], constants, unit)
}

/// Subsets of `0..k` ordered by size, then lexicographically.
fn subsets(k: usize) -> Vec<u64> {
    let mut all: Vec<u64> = (0..1u64 << k).collect();
    let key = |m: &u64| -> (u32, Vec<u32>) {
        let elems = (0..k as u32).filter(|b| m >> b & 1 == 1).collect();
        (m.count_ones(), elems)
    };
    all.sort_by_key(key);
    all
}

/// Sign of reordering the word `S·T` into increasing order.
fn merge_sign(s: u64, t: u64) -> bool {
    let mut inversions = 0u32;
    let mut rest = t;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (s >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    inversions % 2 == 1
}

fn monomial_label(prefix: char, m: u64, k: usize) -> String {
    if m == 0 {
        return "1".into();
    }
    (0..k).filter(|b| m >> b & 1 == 1).map(|b| format!("{prefix}{}", b + 1)).collect()
}

/// Builds the ℤ₂-graded algebra on subset monomials with
/// `v_S v_T = ±(Π_{i∈S∩T} square(i)) v_{SΔT}`.
fn exterior_like(k: usize, prefix: char, square: impl Fn(usize) -> Q) -> FiniteGradedAlgebra {
    assert!(k < 20, "too many generators");
    let basis = subsets(k);
    let mut pos = vec![0usize; basis.len()];
    for (i, &m) in basis.iter().enumerate() {
        pos[m as usize] = i;
    }
    let mut constants = Vec::new();
    for (i, &s) in basis.iter().enumerate() {
        for (j, &t) in basis.iter().enumerate() {
            let mut c = if merge_sign(s, t) { -one() } else { one() };
            let common = s & t;
            for b in 0..k {
                if common >> b & 1 == 1 {
                    c *= square(b);
                }
            }
            if !c.is_zero() {
                constants.push((i, j, pos[(s ^ t) as usize], c));
            }
        }
    }
    let g = GradingGroup::z2();
    let degrees = basis.iter().map(|m| g.elem(&[(m.count_ones() % 2) as i64]).unwrap()).collect();
    let labels = basis.iter().map(|&m| monomial_label(prefix, m, k)).collect();
    let mut unit = vec![Q::zero(); basis.len()];
    unit[0] = one();
    FiniteGradedAlgebra::new(g, labels, degrees, constants, unit).expect("well formed")
}

/// Grassmann algebra on `k` generators with the canonical ℤ₂-grading.
pub fn build_grassmann_truncated(k: usize) -> FiniteGradedAlgebra {
    exterior_like(k, 'e', |_| Q::zero())
}

/// Clifford algebra with `v_i² = q_i`, ℤ₂-graded by word parity.
pub fn build_clifford(qs: &[Q]) -> Result<FiniteGradedAlgebra> {
    if let Some(i) = qs.iter().position(Zero::is_zero) {
        return Err(Error::Precondition(format!("degenerate form: coefficient {} is zero", i + 1)));
    }
    Ok(exterior_like(qs.len(), 'v', |b| qs[b].clone()))
}

/// Functions on `m` points: orthogonal idempotents `d_1..d_m`.
pub fn build_function_algebra(m: usize) -> FiniteGradedAlgebra {
    let g = GradingGroup::trivial();
    let constants: Vec<_> = (0..m).map(|i| (i, i, i, one())).collect();
    FiniteGradedAlgebra::new(g.clone(), (1..=m).map(|i| format!("d{i}")).collect(), vec![g.identity(); m], constants, vec![one(); m])
        .expect("well formed")
}

/// `F[t]/(t^k)`, `k ≥ 1`.
pub fn build_truncated_polynomial(k: usize) -> Result<FiniteGradedAlgebra> {
    if k == 0 {
        return Err(Error::Precondition("truncation order must be positive".into()));
    }
    let g = GradingGroup::trivial();
    let mut constants = Vec::new();
    for a in 0..k {
        for b in 0..k - a {
            constants.push((a, b, a + b, one()));
        }
    }
    let labels = (0..k)
        .map(|a| match a {
            0 => "1".to_string(),
            1 => "t".to_string(),
            _ => format!("t^{a}"),
        })
        .collect();
    let mut unit = vec![Q::zero(); k];
    unit[0] = one();
    FiniteGradedAlgebra::new(g.clone(), labels, vec![g.identity(); k], constants, unit)
}

/// `A ⊗ C` for commutative, trivially graded, unital `C`; basis index `a·dim C + c`.
pub fn tensor_with_commutative(a: &FiniteGradedAlgebra, c: &FiniteGradedAlgebra) -> Result<FiniteGradedAlgebra> {
    if !c.is_commutative() {
        return Err(Error::Precondition("second factor is not commutative".into()));
    }
    if !c.is_trivially_graded() {
        return Err(Error::Precondition("second factor is not trivially graded".into()));
    }
    if c.dim() > 0 && !super::algebra::validate_algebra(c).is_pass() {
        return Err(Error::Precondition("second factor is not a unital associative algebra".into()));
    }
    let (na, nc) = (a.dim(), c.dim());
    let mut constants = Vec::new();
    for (i, j, k, x) in a.constants() {
        for (p, r, s, y) in c.constants() {
            constants.push((i * nc + p, j * nc + r, k * nc + s, x * y));
        }
    }
    let mut labels = Vec::with_capacity(na * nc);
    let mut degrees = Vec::with_capacity(na * nc);
    let mut unit = Vec::with_capacity(na * nc);
    for i in 0..na {
        for p in 0..nc {
            labels.push(format!("{}⊗{}", a.label(i), c.label(p)));
            degrees.push(a.degree(i).clone());
            unit.push(&a.unit()[i] * &c.unit()[p]);
        }
    }
    FiniteGradedAlgebra::new(a.group().clone(), labels, degrees, constants, unit)
}

/// Componentwise product. Without `regrade` all factors must share a
/// grading group; with it each factor gets explicit degrees in a common group.
pub fn direct_product(
    factors: &[FiniteGradedAlgebra],
    regrade: Option<(GradingGroup, Vec<Vec<GroupElem>>)>,
) -> Result<FiniteGradedAlgebra> {
    if factors.is_empty() {
        return Err(Error::Precondition("direct product of no factors".into()));
    }
    if factors.len() == 1 && regrade.is_none() {
        return Ok(factors[0].clone());
    }
    let regraded: Vec<FiniteGradedAlgebra> = match regrade {
        None => {
            let g = factors[0].group();
            if let Some(f) = factors.iter().find(|f| f.group() != g) {
                return Err(Error::GroupMismatch(format!("factors graded by {:?} and {:?}", g, f.group())));
            }
            factors.to_vec()
        }
        Some((group, degs)) => {
            if degs.len() != factors.len() {
                return Err(Error::Structural("regrade needs one degree list per factor".into()));
            }
            factors.iter().zip(degs).map(|(f, d)| f.regrade(group.clone(), d)).collect::<Result<_>>()?
        }
    };
    let group = regraded[0].group().clone();
    let mut labels = Vec::new();
    let mut degrees = Vec::new();
    let mut unit = Vec::new();
    let mut constants = Vec::new();
    let mut offset = 0;
    for (f, alg) in regraded.iter().enumerate() {
        for (i, j, k, c) in alg.constants() {
            constants.push((offset + i, offset + j, offset + k, c.clone()));
        }
        labels.extend(alg.labels().iter().map(|l| format!("{l}#{}", f + 1)));
        degrees.extend(alg.degrees().iter().cloned());
        unit.extend(alg.unit().iter().cloned());
        offset += alg.dim();
    }
    FiniteGradedAlgebra::new(group, labels, degrees, constants, unit)
}

/// The `ℤ₂ⁿ`-grading of a product of `n` ℤ₂-graded factors where factor
/// `f` contributes its parity in coordinate `f`.
pub fn parity_product_grading(factors: &[FiniteGradedAlgebra]) -> Result<(GradingGroup, Vec<Vec<GroupElem>>)> {
    let n = factors.len();
    let group = GradingGroup::z2_power(n);
    let mut all = Vec::with_capacity(n);
    for (f, alg) in factors.iter().enumerate() {
        if alg.group() != &GradingGroup::z2() {
            return Err(Error::GroupMismatch(format!("factor {} is not ℤ₂-graded", f + 1)));
        }
        let degs = alg
            .degrees()
            .iter()
            .map(|d| {
                let mut v = vec![0i64; n];
                v[f] = d.coords()[0];
                group.elem(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        all.push(degs);
    }
    Ok((group, all))
}

/// `eAe` with unit `e`, plus its inclusion into `A` as a column matrix.
#[derive(Clone, Debug)]
pub struct Corner {
    pub algebra: FiniteGradedAlgebra,
    pub inclusion: Matrix,
}

pub fn corner_algebra(a: &FiniteGradedAlgebra, e: &HomogeneousElement) -> Result<Corner> {
    if e.degree() != &a.group().identity() {
        return Err(Error::Precondition(format!("idempotent has degree {}, not 1_G", e.degree())));
    }
    let ev = e.coords();
    if ev.len() != a.dim() {
        return Err(Error::Structural("idempotent has the wrong length".into()));
    }
    if a.mul(ev, ev) != ev {
        return Err(Error::Precondition("element is not idempotent".into()));
    }
    let span = Subspace::span(a.dim(), (0..a.dim()).map(|i| a.mul(&a.mul(ev, &a.basis_vec(i)), ev)));
    let (algebra, inclusion) = subalgebra(a, &span, ev.to_vec())?;
    Ok(Corner { algebra, inclusion })
}

/// `e_11 + … + e_kk` in `M_n`.
pub fn matrix_idempotent(n: usize, k: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n * n];
    for i in 0..k.min(n) {
        v[i * n + i] = Q::one();
    }
    v
}

/// Parses builder names such as `M:2`, `UT:3`, `E:4`, `Cl:-1,-1`, `Fun:2`,
/// `Poly:3` and `F`.
pub fn build_named(name: &str) -> Result<FiniteGradedAlgebra> {
    let name = name.trim();
    let (head, arg) = name.split_once(':').unwrap_or((name, ""));
    let size = || -> Result<usize> { arg.trim().parse().map_err(|_| Error::Parse(format!("bad size in algebra name {name:?}"))) };
    match head {
        "F" if arg.is_empty() => Ok(base_field()),
        "M" => build_matrix_algebra(size()?, None),
        "UT" => build_upper_triangular(size()?),
        "E" => {
            let k = size()?;
            if k > 12 {
                return Err(Error::Precondition("at most 12 Grassmann generators".into()));
            }
            Ok(build_grassmann_truncated(k))
        }
        "Cl" => {
            let qs = arg.split(',').filter(|s| !s.trim().is_empty()).map(crate::rational::parse_q).collect::<Result<Vec<_>>>()?;
            if qs.len() > 12 {
                return Err(Error::Precondition("at most 12 Clifford generators".into()));
            }
            build_clifford(&qs)
        }
        "Fun" => Ok(build_function_algebra(size()?)),
        "Poly" => build_truncated_polynomial(size()?),
        _ => Err(Error::Parse(format!("unknown algebra name {name:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::algebra::{element_from_terms, validate_algebra};
    use crate::rational::{q, qr};

    #[test]
    fn all_builders_validate() {
        let algs = vec![
            base_field(),
            build_matrix_algebra(3, None).unwrap(),
            build_upper_triangular(3).unwrap(),
            build_grassmann_truncated(3),
            build_clifford(&[q(-1), q(-1)]).unwrap(),
            build_clifford(&[q(2), qr(-1, 3), q(5)]).unwrap(),
            build_function_algebra(3),
            build_truncated_polynomial(4).unwrap(),
        ];
        for a in &algs {
            assert!(validate_algebra(a).is_pass(), "{:?}", a.labels());
        }
    }

    #[test]
    fn grassmann_relations() {
        let e = build_grassmann_truncated(2);
        assert_eq!(e.labels(), &["1", "e1", "e2", "e1e2"]);
        let e1 = e.basis_vec(1);
        let e2 = e.basis_vec(2);
        let lhs = e.mul(&e1, &e2);
        let rhs: Vec<Q> = e.mul(&e2, &e1).into_iter().map(|x| -x).collect();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, e.basis_vec(3));
        let e3 = build_grassmann_truncated(3);
        let dims: Vec<usize> = e3.component_dims().into_iter().map(|(_, d)| d).collect();
        assert_eq!(dims, vec![4, 4]);
    }

    #[test]
    fn quaternions() {
        let h = build_clifford(&[q(-1), q(-1)]).unwrap();
        let i = h.basis_vec(1);
        let j = h.basis_vec(2);
        assert_eq!(h.mul(&i, &i), vec![q(-1), q(0), q(0), q(0)]);
        assert_eq!(h.mul(&j, &j), vec![q(-1), q(0), q(0), q(0)]);
        let ij = h.mul(&i, &j);
        let ji: Vec<Q> = h.mul(&j, &i).into_iter().map(|x| -x).collect();
        assert_eq!(ij, ji);
        assert!(build_clifford(&[q(1), q(0)]).is_err());
    }

    #[test]
    fn split_clifford_idempotent() {
        let c = build_clifford(&[q(1)]).unwrap();
        let e = vec![qr(1, 2), qr(1, 2)];
        assert_eq!(c.mul(&e, &e), e);
    }

    #[test]
    fn elementary_z2_matrix_grading() {
        let g = GradingGroup::z2();
        let degs = elementary_grading(&g, &[g.elem(&[0]).unwrap(), g.elem(&[1]).unwrap()]);
        let m = build_matrix_algebra(2, Some((g.clone(), degs))).unwrap();
        assert!(validate_algebra(&m).is_pass());
        let bad = vec![g.elem(&[1]).unwrap(), g.identity(), g.identity(), g.identity()];
        assert!(matches!(build_matrix_algebra(2, Some((g, bad))), Err(Error::Grading(_))));
    }

    #[test]
    fn tensor_and_products() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let t = tensor_with_commutative(&m2, &build_function_algebra(2)).unwrap();
        assert_eq!(t.dim(), 8);
        assert!(validate_algebra(&t).is_pass());
        assert!(tensor_with_commutative(&m2, &m2).is_err());
        let e2 = build_grassmann_truncated(2);
        let t = tensor_with_commutative(&e2, &build_truncated_polynomial(2).unwrap()).unwrap();
        assert_eq!(t.dim(), 8);
        assert!(validate_algebra(&t).is_pass());

        let grading = parity_product_grading(&[e2.clone(), e2.clone()]).unwrap();
        let p = direct_product(&[e2.clone(), e2.clone()], Some(grading)).unwrap();
        assert_eq!(p.dim(), 8);
        assert!(validate_algebra(&p).is_pass());
        let ff = direct_product(&[base_field(), base_field()], None).unwrap();
        assert!(ff.is_commutative());
        assert_eq!(ff.unit(), &[q(1), q(1)]);
        assert!(direct_product(&[e2, m2], None).is_err());
    }

    #[test]
    fn corners() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let e11 = HomogeneousElement::basis(&m2, 0);
        assert_eq!(corner_algebra(&m2, &e11).unwrap().algebra.dim(), 1);
        let e12 = HomogeneousElement::basis(&m2, 1);
        assert!(matches!(corner_algebra(&m2, &e12), Err(Error::Precondition(_))));
        let m3 = build_matrix_algebra(3, None).unwrap();
        let e = HomogeneousElement::from_coords(&m3, matrix_idempotent(3, 2)).unwrap();
        let c = corner_algebra(&m3, &e).unwrap();
        assert_eq!(c.algebra.labels(), &["e11", "e12", "e21", "e22"]);
        assert!(validate_algebra(&c.algebra).is_pass());
        let v = element_from_terms(&m3, &[("e12", q(1))]).unwrap();
        assert_eq!(c.inclusion.mul_vec(&[q(0), q(1), q(0), q(0)]), v);
    }

    #[test]
    fn named_builders() {
        assert_eq!(build_named("M:2").unwrap().dim(), 4);
        assert_eq!(build_named("Cl:-1,-1").unwrap().dim(), 4);
        assert_eq!(build_named("Poly:3").unwrap().dim(), 3);
        assert!(build_named("X:2").is_err());
        assert!(build_named("M:x").is_err());
    }
}
