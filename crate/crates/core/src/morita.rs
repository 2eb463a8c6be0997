//! Graded Morita data: matrix algebras over `B`, corners, and the
//! morphism of locally ringed spaces they induce.

use std::collections::BTreeSet;

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grading::{
    corner_algebra, verify_isomorphism, Corner, FiniteGradedAlgebra, GradedAlgebraMorphism, GradingGroup, HomogeneousElement,
};
use crate::identities::{patterns_of_degree, GradedPolynomial, GradedVariable, IdentitySource, KernelConfig, PreparedAlgebra};
use crate::linalg::Matrix;
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};
use crate::sheaves::{build_recovering_morphism, PresheafMorphism, PresheafOfAlgebras, RecoveringOptions};

/// `M_n(B)` with `deg(e_ij ⊗ b) = deg(b)`; basis index `(i·n + j)·dim B + k`.
pub fn matrix_over(b: &FiniteGradedAlgebra, n: usize) -> Result<FiniteGradedAlgebra> {
    if n == 0 {
        return Err(Error::Precondition("matrix size must be at least 1".into()));
    }
    if n == 1 {
        return Ok(b.clone());
    }
    let m = b.dim();
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * m + k;
    let mut labels = Vec::with_capacity(n * n * m);
    let mut degrees = Vec::with_capacity(n * n * m);
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                labels.push(format!("e{}{}⊗{}", i + 1, j + 1, b.label(k)));
                degrees.push(b.degree(k).clone());
            }
        }
    }
    let mut constants = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                for x in 0..m {
                    for y in 0..m {
                        for (z, c) in b.product(x, y) {
                            constants.push((idx(i, j, x), idx(j, l, y), idx(i, l, *z), c.clone()));
                        }
                    }
                }
            }
        }
    }
    let mut unit = vec![Q::zero(); n * n * m];
    for i in 0..n {
        for (k, c) in b.unit().iter().enumerate() {
            unit[idx(i, i, k)] = c.clone();
        }
    }
    FiniteGradedAlgebra::new(b.group().clone(), labels, degrees, constants, unit)
}

/// `diag(1_B, 0, …, 0)` in `M_n(B)`.
pub fn first_diagonal_idempotent(b: &FiniteGradedAlgebra, n: usize) -> Vec<Q> {
    let mut e = vec![Q::zero(); n * n * b.dim()];
    e[..b.dim()].clone_from_slice(b.unit());
    e
}

/// Bijective, multiplicative, unital and degree preserving; a dimension
/// mismatch fails at once.
pub fn verify_graded_iso(phi: &GradedAlgebraMorphism) -> VerificationReport {
    if phi.source.dim() != phi.target.dim() {
        return VerificationReport::fail(
            "verify_graded_iso",
            json!({"property": "dimension", "source": phi.source.dim(), "target": phi.target.dim()}),
        );
    }
    let mut r = verify_isomorphism(phi);
    r.check = "verify_graded_iso".into();
    r
}

/// Searches signed permutations of the bases for a graded isomorphism.
/// Only offered for algebras of dimension at most 3.
pub fn search_graded_iso(a: &FiniteGradedAlgebra, b: &FiniteGradedAlgebra) -> Result<Option<GradedAlgebraMorphism>> {
    if a.dim() > 3 || b.dim() > 3 {
        return Err(Error::Budget("isomorphism search is limited to dimension 3".into()));
    }
    if a.dim() != b.dim() || a.group() != b.group() {
        return Ok(None);
    }
    let n = a.dim();
    for perm in crate::identities::permutations(n) {
        for signs in 0..1u32 << n {
            let mut m = Matrix::zeros(n, n);
            for (c, &r) in perm.iter().enumerate() {
                m.set(r, c, if signs >> c & 1 == 1 { -Q::one() } else { Q::one() });
            }
            let phi = GradedAlgebraMorphism::new(a.clone(), b.clone(), m)?;
            if verify_graded_iso(&phi).is_pass() {
                return Ok(Some(phi));
            }
        }
    }
    Ok(None)
}

/// The grading group of a Morita request. Only abelian groups are
/// supported by the construction; others are carried so they can be
/// rejected with a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Abelian(GradingGroup),
    Nonabelian { nonabelian: String },
}

impl GroupSpec {
    /// `S3`, `D4`, `A4`, `Q8` are nonabelian; `Z`, `Z2`, `Z2xZ3`, `1` are
    /// abelian.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let nonabelian = |n: &str| Self::Nonabelian { nonabelian: n.to_string() };
        let family = |p: char, min: u32| t.strip_prefix(p).and_then(|k| k.parse::<u32>().ok()).is_some_and(|k| k >= min);
        if family('S', 3) || family('D', 3) || family('A', 4) || t == "Q8" {
            return Ok(nonabelian(t));
        }
        if t == "1" || t.is_empty() {
            return Ok(Self::Abelian(GradingGroup::trivial()));
        }
        let mut free = 0;
        let mut torsion = Vec::new();
        for f in t.split('x').map(str::trim) {
            match f.strip_prefix('Z') {
                Some("") => free += 1,
                Some(m) => torsion.push(m.parse().map_err(|_| Error::Parse(format!("bad group factor {f:?}")))?),
                None => return Err(Error::Parse(format!("unknown group {t:?}"))),
            }
        }
        Ok(Self::Abelian(GradingGroup::new(free, torsion)?))
    }

    pub fn as_abelian(&self) -> Option<&GradingGroup> {
        match self {
            GroupSpec::Abelian(g) => Some(g),
            GroupSpec::Nonabelian { .. } => None,
        }
    }
}

/// `A ≅ e M_n(B) e` data.
#[derive(Clone, Debug)]
pub struct MoritaContext {
    pub a: FiniteGradedAlgebra,
    pub b: FiniteGradedAlgebra,
    pub n: usize,
    /// Coordinates of `e` in `M_n(B)`.
    pub e: Vec<Q>,
    /// `A → eM_n(B)e`, in the corner's basis.
    pub iso: Option<Matrix>,
    pub group: GroupSpec,
}

/// Validated pieces of a context.
#[derive(Clone, Debug)]
pub struct MoritaData {
    pub matrix_algebra: FiniteGradedAlgebra,
    pub corner: Corner,
}

impl MoritaContext {
    pub fn new(a: FiniteGradedAlgebra, b: FiniteGradedAlgebra, n: usize, e: Vec<Q>) -> Self {
        let group = GroupSpec::Abelian(b.group().clone());
        Self { a, b, n, e, iso: None, group }
    }

    pub fn with_iso(mut self, iso: Matrix) -> Self {
        self.iso = Some(iso);
        self
    }

    /// Checks the group, `e² = e`, `deg e = 1_G` and the supplied isomorphism.
    #[allow(clippy::result_large_err)]
    pub fn validate(&self) -> std::result::Result<MoritaData, VerificationReport> {
        let fail = |w: Value| Err(VerificationReport::fail("morita_context", w));
        let Some(g) = self.group.as_abelian() else {
            return fail(json!({"hypothesis": "abelian_group", "group": self.group}));
        };
        if self.a.group() != g || self.b.group() != g {
            return fail(json!({"hypothesis": "single_group", "reason": "A and B must be graded by the same group"}));
        }
        let m = match matrix_over(&self.b, self.n) {
            Ok(m) => m,
            Err(e) => return fail(json!({"hypothesis": "matrix_size", "error": e.to_string()})),
        };
        let e = match HomogeneousElement::from_coords(&m, self.e.clone()) {
            Ok(e) => e,
            Err(err) => return fail(json!({"hypothesis": "homogeneous_idempotent", "error": err.to_string()})),
        };
        if e.degree() != &g.identity() {
            return fail(json!({"hypothesis": "neutral_degree", "degree": e.degree().to_string()}));
        }
        let corner = match corner_algebra(&m, &e) {
            Ok(c) => c,
            Err(err) => return fail(json!({"hypothesis": "idempotent", "error": err.to_string()})),
        };
        if let Some(iso) = &self.iso {
            let r = match GradedAlgebraMorphism::new(self.a.clone(), corner.algebra.clone(), iso.clone()) {
                Ok(phi) => verify_graded_iso(&phi),
                Err(err) => VerificationReport::fail("verify_graded_iso", json!({"error": err.to_string()})),
            };
            if !r.is_pass() {
                return fail(json!({"hypothesis": "graded_isomorphism", "detail": r.witness}));
            }
        }
        Ok(MoritaData { matrix_algebra: m, corner })
    }
}

fn standard_in_kernel(src: &PreparedAlgebra, group: &GradingGroup, k: usize, cfg: &KernelConfig) -> Result<bool> {
    let vars: Vec<GradedVariable> = (1..=k).map(|i| GradedVariable::new(i, group.identity())).collect();
    let s = GradedPolynomial::standard(&vars);
    let (pattern, coords, _) = crate::identities::as_pattern_element(group, &s)?;
    Ok(src.identity_kernel(&pattern, cfg)?.contains(&coords))
}

/// Truncated certificate of `var(A) ⊆ var(M_n(B))`: at every pattern of
/// degree `≤ d`, `ker M_n(B) ⊆ ker eM_n(B)e`, and `ker eM_n(B)e = ker A`
/// when an isomorphism is supplied.
pub fn corner_variety_certificate(ctx: &MoritaContext, d: usize, cfg: &KernelConfig) -> Result<VerificationReport> {
    let data = match ctx.validate() {
        Ok(d) => d,
        Err(r) => return Ok(r.with_truncation(d)),
    };
    let group = data.matrix_algebra.group().clone();
    let mut report = VerificationReport::pass("corner_variety_certificate").with_truncation(d);
    report.detail("matrix_dim", data.matrix_algebra.dim());
    report.detail("corner_dim", data.corner.algebra.dim());
    let pm = PreparedAlgebra::new(&data.matrix_algebra);
    let pc = PreparedAlgebra::new(&data.corner.algebra);
    let pa = PreparedAlgebra::new(&ctx.a);
    let support: BTreeSet<_> = pm.support().union(&ctx.a.supported_degrees()).cloned().collect();
    let mut checked = 0usize;
    let mut equal_everywhere = true;
    for k in 0..=d {
        for pattern in patterns_of_degree(&group, &support, k) {
            checked += 1;
            let km = pm.identity_kernel(&pattern, cfg)?;
            let kc = pc.identity_kernel(&pattern, cfg)?.subspace();
            if let Some(v) = km.basis.iter().find(|v| !kc.contains(v)) {
                report.absorb(
                    Verdict::Fail,
                    Some(json!({"inclusion": "matrix ⊆ corner", "pattern": pattern.describe(), "polynomial": pattern.to_polynomial(v).to_string()})),
                );
                report.detail("patterns_checked", checked);
                return Ok(report);
            }
            equal_everywhere &= km.subspace() == kc;
            if ctx.iso.is_some() {
                let ka = pa.identity_kernel(&pattern, cfg)?.subspace();
                if ka != kc {
                    report.absorb(Verdict::Fail, Some(json!({"equality": "corner = A", "pattern": pattern.describe()})));
                    report.detail("patterns_checked", checked);
                    return Ok(report);
                }
            }
        }
    }
    report.detail("patterns_checked", checked);
    report.detail("matrix_and_corner_kernels_equal", equal_everywhere);
    report.detail("iso_supplied", ctx.iso.is_some());
    let standard: Vec<Value> = (1..=d)
        .map(|k| -> Result<Value> {
            Ok(json!({"degree": k, "in_matrix_kernel": standard_in_kernel(&pm, &group, k, cfg)?, "in_A_kernel": standard_in_kernel(&pa, &group, k, cfg)?}))
        })
        .collect::<Result<_>>()?;
    report.detail("standard_polynomials", standard);
    Ok(report)
}

/// Outcome of [`morita_ringed_morphism`].
#[derive(Clone, Debug)]
pub struct MoritaMorphism {
    pub morphism: Option<PresheafMorphism>,
    pub report: VerificationReport,
}

/// `(X, G) → (X, F)` with `F ∈ var(A)`, `G ∈ var(M_n(B))`, via the corner
/// certificate and the recovering construction.
pub fn morita_ringed_morphism(
    f: &PresheafOfAlgebras,
    g: &PresheafOfAlgebras,
    ctx: &MoritaContext,
    d: usize,
    cfg: &KernelConfig,
) -> Result<MoritaMorphism> {
    let mut report = VerificationReport::pass("morita_ringed_morphism").with_truncation(d);
    report.note("one grading group is used throughout");
    let cert = corner_variety_certificate(ctx, d, cfg)?;
    let mut ledger =
        vec![json!({"hypothesis": "corner_certificate", "holds": cert.is_pass(), "truncation_degree": d, "detail": cert.witness})];
    if !cert.is_pass() {
        report.absorb(Verdict::Fail, Some(json!({"failed_hypothesis": "corner_certificate", "detail": cert.to_json()})));
        report.detail("hypotheses", ledger);
        return Ok(MoritaMorphism { morphism: None, report });
    }
    let opts = RecoveringOptions { reference: Some(&ctx.a), candidate: None, kernel: *cfg };
    let rec = build_recovering_morphism(f, g, d, &opts)?;
    if let Some(Value::Array(entries)) = rec.report.details.get("hypotheses") {
        ledger.extend(entries.iter().cloned());
    }
    report.detail("hypotheses", ledger);
    if !rec.report.is_pass() {
        report.absorb(rec.report.verdict, rec.report.witness.clone());
    }
    for (k, v) in &rec.report.details {
        if k != "hypotheses" {
            report.detail(k, v.clone());
        }
    }
    Ok(MoritaMorphism { morphism: rec.morphism, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::sheaves::{constant_sheaf, FiniteTopology};

    #[test]
    fn matrix_over_examples() {
        let f = base_field();
        assert_eq!(matrix_over(&f, 1).unwrap(), f);
        let m2 = matrix_over(&f, 2).unwrap();
        assert!(validate_algebra(&m2).is_pass());
        let iso = GradedAlgebraMorphism::new(m2.clone(), build_matrix_algebra(2, None).unwrap(), Matrix::identity(4)).unwrap();
        assert!(verify_graded_iso(&iso).is_pass());
        let e2 = build_grassmann_truncated(2);
        let m = matrix_over(&e2, 2).unwrap();
        assert_eq!(m.dim(), 16);
        assert!(validate_algebra(&m).is_pass());
        assert_eq!(m.component_dims().iter().map(|(_, d)| *d).collect::<Vec<_>>(), vec![8, 8]);
    }

    #[test]
    fn corners_recover_b() {
        for b in [base_field(), build_truncated_polynomial(2).unwrap(), build_grassmann_truncated(2)] {
            for n in 1..=3 {
                let m = matrix_over(&b, n).unwrap();
                let e = HomogeneousElement::from_coords(&m, first_diagonal_idempotent(&b, n)).unwrap();
                let c = corner_algebra(&m, &e).unwrap();
                // Corner basis is e11⊗b_k in order.
                let phi = GradedAlgebraMorphism::new(b.clone(), c.algebra.clone(), Matrix::identity(b.dim())).unwrap();
                assert!(verify_graded_iso(&phi).is_pass(), "n = {n}");
            }
        }
    }

    #[test]
    fn iso_examples() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let e = HomogeneousElement::from_coords(&m2, matrix_idempotent(2, 1)).unwrap();
        let c = corner_algebra(&m2, &e).unwrap();
        let found = search_graded_iso(&c.algebra, &base_field()).unwrap();
        assert!(found.is_some());
        let e2 = build_grassmann_truncated(2);
        let forget = GradedAlgebraMorphism::new(e2.clone(), e2.trivialize(), Matrix::identity(4));
        assert!(forget.is_err() || !verify_graded_iso(&forget.unwrap()).is_pass());
    }

    #[test]
    fn pipeline() {
        let cfg = KernelConfig::default();
        let f = base_field();
        let ctx = MoritaContext::new(f.clone(), f.clone(), 2, matrix_idempotent(2, 1)).with_iso(Matrix::identity(1));
        let cert = corner_variety_certificate(&ctx, 4, &cfg).unwrap();
        assert!(cert.is_pass(), "{}", cert.to_json());
        let s4 = &cert.details["standard_polynomials"][3];
        assert_eq!(s4["in_matrix_kernel"], true);
        assert_eq!(cert.details["standard_polynomials"][2]["in_matrix_kernel"], false);

        let t = FiniteTopology::sierpinski();
        let m2 = build_matrix_algebra(2, None).unwrap();
        let out = morita_ringed_morphism(&constant_sheaf(&t, &f), &constant_sheaf(&t, &m2), &ctx, 4, &cfg).unwrap();
        assert!(out.report.is_pass(), "{}", out.report.to_json());
        assert!(out.morphism.is_some());

        let full = MoritaContext::new(m2.clone(), f.clone(), 2, matrix_idempotent(2, 2)).with_iso(Matrix::identity(4));
        let r = corner_variety_certificate(&full, 3, &cfg).unwrap();
        assert!(r.is_pass());
        assert_eq!(r.details["matrix_and_corner_kernels_equal"], true);

        let mut bad = ctx.clone();
        bad.group = GroupSpec::parse("S3").unwrap();
        let r = corner_variety_certificate(&bad, 2, &cfg).unwrap();
        assert_eq!(r.witness.unwrap()["hypothesis"], "abelian_group");
    }

    #[test]
    fn non_neutral_idempotent_rejected() {
        let e2 = build_grassmann_truncated(2);
        let cfg = KernelConfig::default();
        // e12 ⊗ e1 is homogeneous of odd degree.
        let mut ctx = MoritaContext::new(e2.clone(), e2.clone(), 2, vec![Q::zero(); 16]);
        ctx.e[4 + 1] = Q::one();
        let r = corner_variety_certificate(&ctx, 2, &cfg).unwrap();
        assert_eq!(r.witness.unwrap()["hypothesis"], "neutral_degree");
        // 1 + e1 is not homogeneous.
        let mut ctx = MoritaContext::new(e2.clone(), e2, 1, vec![Q::one(), Q::one(), Q::zero(), Q::zero()]);
        ctx.iso = None;
        let r = corner_variety_certificate(&ctx, 2, &cfg).unwrap();
        assert_eq!(r.witness.unwrap()["hypothesis"], "homogeneous_idempotent");
    }
}
