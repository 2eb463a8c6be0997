use std::collections::BTreeMap;

use num::One;
use serde_json::json;

use super::topology::{members, FiniteTopology};
use crate::error::{Error, Result};
use crate::grading::{
    build_function_algebra, tensor_with_commutative, verify_morphism, FiniteGradedAlgebra, GradedAlgebraMorphism, GradingGroup,
};
use crate::identities::{variety_contains, IdentitySource, KernelConfig};
use crate::linalg::Matrix;
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};

/// A presheaf of graded algebras on a finite space. Sections are indexed
/// by open index; restrictions `(U, V)` with `V ⊊ U` are stored as
/// matrices, `(U, U)` is the identity and `(U, ∅)` defaults to the zero map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafOfAlgebras {
    topology: FiniteTopology,
    sections: Vec<FiniteGradedAlgebra>,
    restrictions: BTreeMap<(usize, usize), Matrix>,
}

impl PresheafOfAlgebras {
    /// Checks shapes, inclusions and that all sections share a grading group.
    pub fn new(
        topology: FiniteTopology,
        sections: Vec<FiniteGradedAlgebra>,
        restrictions: BTreeMap<(usize, usize), Matrix>,
    ) -> Result<Self> {
        if sections.len() != topology.n_opens() {
            return Err(Error::Structural(format!("{} sections for {} opens", sections.len(), topology.n_opens())));
        }
        if let Some(g) = sections.first().map(|s| s.group().clone()) {
            if let Some(s) = sections.iter().find(|s| s.group() != &g) {
                return Err(Error::GroupMismatch(format!("sections graded by {:?} and {:?}", g, s.group())));
            }
        }
        for (&(u, v), m) in &restrictions {
            if u >= sections.len() || v >= sections.len() || !topology.contains(u, v) {
                return Err(Error::Structural(format!("restriction ({u},{v}) is not along an inclusion of opens")));
            }
            if m.rows() != sections[v].dim() || m.cols() != sections[u].dim() {
                return Err(Error::Structural(format!("restriction ({u},{v}) has the wrong shape")));
            }
        }
        let mut restrictions = restrictions;
        restrictions.retain(|_, m| m.rows() > 0 && m.cols() > 0);
        Ok(Self { topology, sections, restrictions })
    }

    pub fn topology(&self) -> &FiniteTopology {
        &self.topology
    }

    pub fn section(&self, u: usize) -> &FiniteGradedAlgebra {
        &self.sections[u]
    }

    pub fn sections(&self) -> &[FiniteGradedAlgebra] {
        &self.sections
    }

    pub fn group(&self) -> GradingGroup {
        self.sections.first().map(|s| s.group().clone()).unwrap_or_else(GradingGroup::trivial)
    }

    pub fn restriction_matrix(&self, u: usize, v: usize) -> Result<Matrix> {
        if u == v {
            return Ok(Matrix::identity(self.sections[u].dim()));
        }
        if let Some(m) = self.restrictions.get(&(u, v)) {
            return Ok(m.clone());
        }
        let (du, dv) = (self.sections[u].dim(), self.sections[v].dim());
        if self.topology.contains(u, v) && (self.topology.open(v) == 0 || du == 0 || dv == 0) {
            return Ok(Matrix::zeros(dv, du));
        }
        Err(Error::Structural(format!(
            "missing restriction from {:?} to {:?}",
            self.topology.describe(self.topology.open(u)),
            self.topology.describe(self.topology.open(v))
        )))
    }

    pub fn restriction(&self, u: usize, v: usize) -> Result<GradedAlgebraMorphism> {
        GradedAlgebraMorphism::new(self.sections[u].clone(), self.sections[v].clone(), self.restriction_matrix(u, v)?)
    }

    pub fn restrict(&self, u: usize, v: usize, s: &[Q]) -> Result<Vec<Q>> {
        Ok(self.restriction_matrix(u, v)?.mul_vec(s))
    }

    /// Pairs `(U, V)` with `V ⊊ U`, in canonical order.
    pub fn inclusion_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.topology.n_opens();
        (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|&(u, v)| u != v && self.topology.contains(u, v)).collect()
    }

    pub fn open_name(&self, u: usize) -> serde_json::Value {
        json!(self.topology.describe(self.topology.open(u)))
    }
}

/// Same value on every nonempty open with identity restrictions.
pub fn constant_presheaf(t: &FiniteTopology, a: &FiniteGradedAlgebra) -> PresheafOfAlgebras {
    let n = t.n_opens();
    let sections: Vec<FiniteGradedAlgebra> =
        (0..n).map(|u| if t.open(u) == 0 { FiniteGradedAlgebra::zero(a.group().clone()) } else { a.clone() }).collect();
    let mut restrictions = BTreeMap::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && t.open(v) != 0 && t.contains(u, v) {
                restrictions.insert((u, v), Matrix::identity(a.dim()));
            }
        }
    }
    PresheafOfAlgebras::new(t.clone(), sections, restrictions).expect("well formed")
}

/// `U ↦ A ⊗ Fun(blocks(U))` with restrictions pulling functions back along
/// a map from the blocks of `V` to the blocks of `U`.
fn tensor_fun_presheaf(t: &FiniteTopology, a: &FiniteGradedAlgebra, blocks: &dyn Fn(usize) -> Vec<u64>) -> PresheafOfAlgebras {
    let n = t.n_opens();
    let parts: Vec<Vec<u64>> = (0..n).map(blocks).collect();
    let sections: Vec<FiniteGradedAlgebra> =
        parts.iter().map(|p| tensor_with_commutative(a, &build_function_algebra(p.len())).expect("commutative factor")).collect();
    let mut restrictions = BTreeMap::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || !t.contains(u, v) {
                continue;
            }
            let (pu, pv) = (&parts[u], &parts[v]);
            let mut m = Matrix::zeros(sections[v].dim(), sections[u].dim());
            for (cv, &bv) in pv.iter().enumerate() {
                let cu = pu.iter().position(|&bu| bv & !bu == 0).expect("blocks refine");
                for i in 0..a.dim() {
                    m.set(i * pv.len() + cv, i * pu.len() + cu, Q::one());
                }
            }
            restrictions.insert((u, v), m);
        }
    }
    PresheafOfAlgebras::new(t.clone(), sections, restrictions).expect("well formed")
}

/// Locally constant `A`-valued functions: `A ⊗ Fun(π₀(U))`.
pub fn constant_sheaf(t: &FiniteTopology, a: &FiniteGradedAlgebra) -> PresheafOfAlgebras {
    let tt = t.clone();
    tensor_fun_presheaf(t, a, &move |u| tt.components(tt.open(u)))
}

/// `U ↦ A ⊗ Fun(U)`, all `A`-valued functions on the points of `U`.
pub fn build_function_sheaf(a: &FiniteGradedAlgebra, t: &FiniteTopology) -> PresheafOfAlgebras {
    let tt = t.clone();
    tensor_fun_presheaf(t, a, &move |u| members(tt.open(u)).into_iter().map(|x| 1u64 << x).collect())
}

/// Optional identity checks for [`check_presheaf`].
#[derive(Clone, Copy, Default)]
pub struct PresheafChecks<'a> {
    /// Every section must lie in `var(reference)` at this degree.
    pub reference: Option<(&'a dyn IdentitySource, usize)>,
    /// Check `Id(F(U)) ⊆ Id(F(V))` along every restriction at this degree.
    pub restriction_identities: Option<usize>,
    pub kernel: KernelConfig,
}

/// Functoriality and morphism validity of every restriction, plus the
/// optional identity checks.
pub fn check_presheaf(f: &PresheafOfAlgebras, checks: &PresheafChecks) -> Result<VerificationReport> {
    let t = f.topology();
    if let Some(w) = t.axiom_violation() {
        return Err(Error::Precondition(format!("invalid topology: {w}")));
    }
    let mut report = VerificationReport::pass("check_presheaf");
    let pairs = f.inclusion_pairs();
    for &(u, v) in &pairs {
        let r = verify_morphism(&f.restriction(u, v)?);
        if !r.is_pass() {
            report.absorb(
                Verdict::Fail,
                Some(json!({"property": "morphism", "from": f.open_name(u), "to": f.open_name(v), "detail": r.witness})),
            );
            return Ok(report);
        }
    }
    for &(u, v) in &pairs {
        for &(v2, w) in &pairs {
            if v2 != v {
                continue;
            }
            let direct = f.restriction_matrix(u, w)?;
            let composed = f.restriction_matrix(v, w)?.mul(&f.restriction_matrix(u, v)?);
            if direct != composed {
                report.absorb(
                    Verdict::Fail,
                    Some(json!({"property": "functoriality", "chain": [f.open_name(u), f.open_name(v), f.open_name(w)]})),
                );
                return Ok(report);
            }
        }
    }
    report.detail("restrictions", pairs.len());
    if let Some((reference, d)) = checks.reference {
        for u in 0..t.n_opens() {
            let r = variety_contains(reference, f.section(u), d, &checks.kernel)?;
            if !r.is_pass() {
                report.absorb(Verdict::Fail, Some(json!({"property": "variety", "open": f.open_name(u), "detail": r.witness})));
                report.truncation_degree = Some(d);
                return Ok(report);
            }
        }
        report.truncation_degree = Some(d);
    }
    if let Some(d) = checks.restriction_identities {
        for &(u, v) in &pairs {
            let r = variety_contains(f.section(u), f.section(v), d, &checks.kernel)?;
            if !r.is_pass() {
                report.note(format!(
                    "identities of the section on {} are not identities of the section on {}",
                    f.open_name(u),
                    f.open_name(v)
                ));
                report.absorb(
                    Verdict::Fail,
                    Some(json!({"property": "restriction_identities", "from": f.open_name(u), "to": f.open_name(v), "detail": r.witness})),
                );
                report.truncation_degree = Some(d);
                return Ok(report);
            }
        }
        report.truncation_degree = Some(d);
    }
    Ok(report)
}

/// A family of per-open morphisms between presheaves on one space.
#[derive(Clone, Debug)]
pub struct PresheafMorphism {
    pub source: PresheafOfAlgebras,
    pub target: PresheafOfAlgebras,
    pub components: Vec<Matrix>,
}

impl PresheafMorphism {
    pub fn new(source: PresheafOfAlgebras, target: PresheafOfAlgebras, components: Vec<Matrix>) -> Result<Self> {
        if source.topology() != target.topology() {
            return Err(Error::Precondition("presheaves live on different spaces".into()));
        }
        for (u, m) in components.iter().enumerate() {
            if m.rows() != target.section(u).dim() || m.cols() != source.section(u).dim() {
                return Err(Error::Structural(format!("component {u} has the wrong shape")));
            }
        }
        if components.len() != source.topology().n_opens() {
            return Err(Error::Structural("one component per open is required".into()));
        }
        Ok(Self { source, target, components })
    }

    pub fn component(&self, u: usize) -> GradedAlgebraMorphism {
        GradedAlgebraMorphism {
            source: self.source.section(u).clone(),
            target: self.target.section(u).clone(),
            matrix: self.components[u].clone(),
        }
    }

    /// Each component is a graded morphism and every naturality square commutes.
    pub fn verify(&self) -> Result<VerificationReport> {
        let mut report = VerificationReport::pass("presheaf_morphism");
        for u in 0..self.components.len() {
            let r = verify_morphism(&self.component(u));
            if !r.is_pass() {
                report.absorb(Verdict::Fail, Some(json!({"property": "component", "open": self.source.open_name(u), "detail": r.witness})));
                return Ok(report);
            }
        }
        for (u, v) in self.source.inclusion_pairs() {
            let lhs = self.target.restriction_matrix(u, v)?.mul(&self.components[u]);
            let rhs = self.components[v].mul(&self.source.restriction_matrix(u, v)?);
            if lhs != rhs {
                report.absorb(
                    Verdict::Fail,
                    Some(json!({"property": "naturality", "from": self.source.open_name(u), "to": self.source.open_name(v)})),
                );
                return Ok(report);
            }
        }
        Ok(report)
    }

    pub fn is_isomorphism(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(u, m)| self.source.section(u).dim() == self.target.section(u).dim() && m.rank() == m.cols())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::identities::KernelConfig;
    use num::Zero;

    #[test]
    fn constant_presheaves_are_valid() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        for t in [FiniteTopology::sierpinski(), FiniteTopology::pseudocircle(), FiniteTopology::discrete(2)] {
            let f = constant_presheaf(&t, &m2);
            assert!(check_presheaf(&f, &PresheafChecks::default()).unwrap().is_pass());
            let s = constant_sheaf(&t, &m2);
            assert!(check_presheaf(&s, &PresheafChecks::default()).unwrap().is_pass());
        }
    }

    #[test]
    fn grading_dropping_restriction_is_caught() {
        let t = FiniteTopology::sierpinski();
        let e2 = build_grassmann_truncated(2);
        let mut f = constant_presheaf(&t, &e2);
        // Swap 1 and e1 in the restriction X → {a}.
        let mut m = Matrix::identity(4);
        m.set(0, 0, Q::zero());
        m.set(1, 1, Q::zero());
        m.set(1, 0, Q::one());
        m.set(0, 1, Q::one());
        let (x, a) = (t.full_index(), t.index_of(1).unwrap());
        f.restrictions.insert((x, a), m);
        let r = check_presheaf(&f, &PresheafChecks::default()).unwrap();
        assert!(!r.is_pass());
        assert_eq!(r.witness.unwrap()["property"], "morphism");
    }

    #[test]
    fn identities_along_restrictions() {
        let t = FiniteTopology::sierpinski();
        let e4 = build_grassmann_truncated(4).trivialize();
        let m2 = build_matrix_algebra(2, None).unwrap();
        let (x, a) = (t.full_index(), t.index_of(1).unwrap());
        // e1 ↦ e12, every other generator ↦ 0.
        let mut m = Matrix::zeros(4, 16);
        m.set(0, 0, Q::one());
        m.set(3, 0, Q::one());
        m.set(1, 1, Q::one());
        let sections = vec![FiniteGradedAlgebra::zero(e4.group().clone()), m2, e4];
        let f = PresheafOfAlgebras::new(t, sections, BTreeMap::from([((x, a), m)])).unwrap();
        assert!(check_presheaf(&f, &PresheafChecks::default()).unwrap().is_pass());
        let checks = PresheafChecks { restriction_identities: Some(3), kernel: KernelConfig::default(), ..Default::default() };
        let r = check_presheaf(&f, &checks).unwrap();
        assert!(!r.is_pass());
        assert_eq!(r.truncation_degree, Some(3));
    }

    #[test]
    fn function_sheaf_dims() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let t = FiniteTopology::discrete(2);
        let f = build_function_sheaf(&m2, &t);
        assert_eq!(f.section(t.full_index()).dim(), 8);
        for (u, v) in f.inclusion_pairs() {
            let r = f.restriction_matrix(u, v).unwrap();
            assert_eq!(r.rank(), f.section(v).dim());
        }
    }
}
