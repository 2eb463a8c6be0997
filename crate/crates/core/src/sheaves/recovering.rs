use std::collections::BTreeMap;

use num::Zero;
use serde_json::{json, Value};

use super::cech::{cech_h1, VectorPresheaf};
use super::presheaf::{PresheafMorphism, PresheafOfAlgebras};
use super::pushforward::ContinuousMap;
use super::sheaf::{check_locally_ringed, check_sheaf};
use crate::error::{Error, Result};
use crate::grading::radical;
use crate::identities::{relatively_free_truncation, variety_contains, GradedVariable, IdentitySource, KernelConfig};
use crate::linalg::{Echelon, Matrix, Subspace};
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};

/// Unknown `(V, row, col)` of a natural family of linear maps.
type Slot = (usize, usize, usize);

/// `W ↦ {natural degree-preserving linear families (φ_V : F(V) → G(V))_{V ⊆ W}}`.
///
/// Algebra morphisms do not form a vector space, so this linear version is
/// the presheaf whose first cohomology is tested before building a
/// recovering morphism.
pub fn hom_presheaf(f: &PresheafOfAlgebras, g: &PresheafOfAlgebras) -> Result<VectorPresheaf> {
    let t = f.topology();
    if t != g.topology() {
        return Err(Error::Precondition("presheaves live on different spaces".into()));
    }
    let n = t.n_opens();
    let mut slots: Vec<Vec<Slot>> = Vec::with_capacity(n);
    let mut spaces: Vec<Subspace> = Vec::with_capacity(n);
    for w in 0..n {
        let subs = t.subopens(w);
        let mut s = Vec::new();
        for &v in &subs {
            let (fv, gv) = (f.section(v), g.section(v));
            for i in 0..gv.dim() {
                for j in 0..fv.dim() {
                    if gv.degree(i) == fv.degree(j) {
                        s.push((v, i, j));
                    }
                }
            }
        }
        let pos: BTreeMap<Slot, usize> = s.iter().enumerate().map(|(k, &x)| (x, k)).collect();
        let mut eqs = Echelon::new(s.len());
        for &v in &subs {
            for &v2 in &subs {
                if v == v2 || !t.contains(v, v2) {
                    continue;
                }
                // G(v→v2) φ_v = φ_v2 F(v→v2)
                let gr = g.restriction_matrix(v, v2)?;
                let fr = f.restriction_matrix(v, v2)?;
                for i in 0..g.section(v2).dim() {
                    for j in 0..f.section(v).dim() {
                        let mut row: Vec<(usize, Q)> = Vec::new();
                        for k in 0..g.section(v).dim() {
                            if let Some(&p) = pos.get(&(v, k, j)) {
                                let c = gr.get(i, k);
                                if !c.is_zero() {
                                    row.push((p, c.clone()));
                                }
                            }
                        }
                        for k in 0..f.section(v2).dim() {
                            if let Some(&p) = pos.get(&(v2, i, k)) {
                                let c = fr.get(k, j);
                                if !c.is_zero() {
                                    row.push((p, -c.clone()));
                                }
                            }
                        }
                        eqs.insert_entries(row);
                    }
                }
            }
        }
        spaces.push(Subspace::span(s.len(), eqs.nullspace()));
        slots.push(s);
    }
    let dims = spaces.iter().map(Subspace::dim).collect();
    let mut restrictions = BTreeMap::new();
    for w in 0..n {
        for w2 in 0..n {
            if w == w2 || !t.contains(w, w2) {
                continue;
            }
            let pos2: BTreeMap<Slot, usize> = slots[w2].iter().enumerate().map(|(k, &x)| (x, k)).collect();
            let mut m = Matrix::zeros(spaces[w2].dim(), spaces[w].dim());
            for (c, fam) in spaces[w].basis().into_iter().enumerate() {
                let mut sub = vec![Q::zero(); slots[w2].len()];
                for (k, slot) in slots[w].iter().enumerate() {
                    if let Some(&p) = pos2.get(slot) {
                        sub[p] = fam[k].clone();
                    }
                }
                let coords = spaces[w2].coords(&sub).expect("natural families restrict");
                for (r, x) in coords.into_iter().enumerate() {
                    m.set(r, c, x);
                }
            }
            restrictions.insert((w, w2), m);
        }
    }
    VectorPresheaf::new(t.clone(), dims, restrictions)
}

/// Result of [`build_relatively_free_presheaf`].
#[derive(Clone, Debug)]
pub struct RelativelyFreePresheaf {
    pub presheaf: Option<PresheafOfAlgebras>,
    pub report: VerificationReport,
}

/// `U ↦ F⟨X⟩ / (Id(F(U)) + words longer than d)` with the canonical
/// quotient restrictions.
pub fn build_relatively_free_presheaf(
    f: &PresheafOfAlgebras,
    variables: &[GradedVariable],
    d: usize,
    cfg: &KernelConfig,
) -> Result<RelativelyFreePresheaf> {
    let t = f.topology();
    let mut report = VerificationReport::pass("relatively_free_presheaf").with_truncation(d);
    for (u, v) in f.inclusion_pairs() {
        if t.open(v) == 0 {
            continue;
        }
        let r = variety_contains(f.section(u), f.section(v), d, cfg)?;
        if !r.is_pass() {
            report.absorb(Verdict::Fail, Some(json!({"from": f.open_name(u), "to": f.open_name(v), "pattern": r.witness})));
            report.note("restriction is not well defined: an identity of the larger section fails on the smaller one");
            return Ok(RelativelyFreePresheaf { presheaf: None, report });
        }
    }
    let frees = (0..t.n_opens()).map(|u| relatively_free_truncation(f.section(u), variables, d, cfg)).collect::<Result<Vec<_>>>()?;
    let group = f.group();
    let sections = frees.iter().map(|h| h.as_algebra(&group)).collect::<Result<Vec<_>>>()?;
    let mut restrictions = BTreeMap::new();
    for (u, v) in f.inclusion_pairs() {
        let mut m = Matrix::zeros(frees[v].dim(), frees[u].dim());
        for (c, w) in frees[u].basis.iter().enumerate() {
            let image = frees[v].express(w).expect("word within the bound");
            for (r, x) in image.into_iter().enumerate() {
                m.set(r, c, x);
            }
        }
        restrictions.insert((u, v), m);
    }
    let h = PresheafOfAlgebras::new(t.clone(), sections, restrictions)?;
    let sheaf = check_sheaf(&h)?;
    let mono = sheaf.details.get("monopresheaf").cloned().unwrap_or(Value::Null);
    report.detail("dims", h.sections().iter().map(|a| a.dim()).collect::<Vec<_>>());
    report.detail("monopresheaf", mono.clone());
    report.detail("gluing", sheaf.details.get("gluing").cloned().unwrap_or(Value::Null));
    if mono != Value::Bool(true) {
        report.absorb(Verdict::Fail, sheaf.witness.clone());
    }
    Ok(RelativelyFreePresheaf { presheaf: Some(h), report })
}

/// Options for [`build_recovering_morphism`].
#[derive(Clone, Default)]
pub struct RecoveringOptions<'a> {
    /// Every section of `F` must lie in `var(reference)`.
    pub reference: Option<&'a dyn IdentitySource>,
    /// Components `F(U) → G(U)` to use instead of the canonical ones.
    pub candidate: Option<Vec<Matrix>>,
    pub kernel: KernelConfig,
}

#[derive(Clone, Debug)]
pub struct RecoveringMorphism {
    /// `j* : F → G` over the identity of the space.
    pub morphism: Option<PresheafMorphism>,
    pub report: VerificationReport,
}

struct Ledger {
    report: VerificationReport,
    entries: Vec<Value>,
}

impl Ledger {
    fn record(&mut self, name: &str, ok: bool, detail: Value) -> bool {
        self.entries.push(json!({"hypothesis": name, "holds": ok, "detail": detail}));
        if !ok {
            self.report.absorb(Verdict::Fail, Some(json!({"failed_hypothesis": name, "detail": detail})));
        }
        ok
    }

    fn finish(mut self, morphism: Option<PresheafMorphism>) -> RecoveringMorphism {
        self.report.detail("hypotheses", Value::Array(self.entries));
        RecoveringMorphism { morphism, report: self.report }
    }
}

fn canonical_component(f: &PresheafOfAlgebras, g: &PresheafOfAlgebras, u: usize) -> Option<Matrix> {
    let (a, b) = (f.section(u), g.section(u));
    if a.dim() == 0 {
        return Some(Matrix::zeros(b.dim(), 0));
    }
    if a == b {
        return Some(Matrix::identity(a.dim()));
    }
    if a.dim() == 1 && !a.unit()[0].is_zero() {
        let c = &a.unit()[0];
        return Some(Matrix::from_cols(&[b.unit().iter().map(|x| x / c).collect()], b.dim()));
    }
    None
}

/// A morphism of graded locally ringed spaces `(X, G) → (X, F)` over the
/// identity of `X`, given sheaf-level maps `j*_U : F(U) → G(U)`.
///
/// Hypotheses, each recorded in the report: both live on one space with
/// one grading group; `Id(G(U)) ⊆ Id(F(U))` up to degree `d` for every
/// open; optionally `F(U) ∈ var(reference)`; `Ȟ¹` of the Hom presheaf
/// vanishes; the components exist, are graded morphisms and natural; and
/// each stalk map sends the radical into the radical.
pub fn build_recovering_morphism(
    f: &PresheafOfAlgebras,
    g: &PresheafOfAlgebras,
    d: usize,
    opts: &RecoveringOptions,
) -> Result<RecoveringMorphism> {
    let mut ledger = Ledger { report: VerificationReport::pass("recovering_morphism").with_truncation(d), entries: Vec::new() };
    ledger.report.note("the space is a finite topological model; Hom is taken as natural degree-preserving linear maps");
    let t = f.topology();
    if !ledger.record("same_space", t == g.topology(), json!(null)) {
        return Ok(ledger.finish(None));
    }
    if !ledger.record("same_group", f.group() == g.group(), json!({"source": f.group(), "target": g.group()})) {
        return Ok(ledger.finish(None));
    }
    let cont = ContinuousMap::identity(t);
    ledger.record("continuity", true, json!({"map": "identity", "points": cont.source().n_points()}));
    for u in 0..t.n_opens() {
        if t.open(u) == 0 {
            continue;
        }
        let r = variety_contains(g.section(u), f.section(u), d, &opts.kernel)?;
        let detail = json!({"open": f.open_name(u), "patterns_checked": r.details.get("patterns_checked"), "witness": r.witness});
        if !ledger.record("variety_inclusion", r.is_pass(), detail) {
            return Ok(ledger.finish(None));
        }
        if let Some(b) = opts.reference {
            let r = variety_contains(b, f.section(u), d, &opts.kernel)?;
            let detail = json!({"open": f.open_name(u), "reference": b.name(), "witness": r.witness});
            if !ledger.record("reference_membership", r.is_pass(), detail) {
                return Ok(ledger.finish(None));
            }
        }
    }
    let h1 = cech_h1(&hom_presheaf(f, g)?)?;
    if !ledger.record("hom_h1_vanishes", h1 == 0, json!({"h1": h1})) {
        return Ok(ledger.finish(None));
    }
    let components: Vec<Matrix> = match &opts.candidate {
        Some(c) => c.clone(),
        None => {
            let mut out = Vec::new();
            for u in 0..t.n_opens() {
                match canonical_component(f, g, u) {
                    Some(m) => out.push(m),
                    None => {
                        ledger.record(
                            "j_star",
                            false,
                            json!({"open": f.open_name(u), "reason": "no canonical map between the sections; supply a candidate"}),
                        );
                        return Ok(ledger.finish(None));
                    }
                }
            }
            out
        }
    };
    ledger.record("j_star", true, json!({"source": if opts.candidate.is_some() { "candidate" } else { "canonical" }}));
    let morphism = match PresheafMorphism::new(f.clone(), g.clone(), components) {
        Ok(m) => m,
        Err(e) => {
            ledger.record("morphism", false, json!({"error": e.to_string()}));
            return Ok(ledger.finish(None));
        }
    };
    let v = morphism.verify()?;
    if !ledger.record("morphism", v.is_pass(), v.witness.clone().unwrap_or(Value::Null)) {
        return Ok(ledger.finish(None));
    }
    for x in 0..t.n_points() {
        let ux = t.minimal_open_index(x);
        let rf = radical(f.section(ux));
        let rg = radical(g.section(ux));
        let bad = rf.basis().into_iter().find(|r| !rg.contains(&morphism.components[ux].mul_vec(r)));
        let detail = json!({"point": t.points()[x], "radical_dim": rf.dim()});
        if !ledger.record("stalk_locality", bad.is_none(), detail) {
            return Ok(ledger.finish(None));
        }
    }
    let lf = check_locally_ringed(f)?;
    let lg = check_locally_ringed(g)?;
    ledger.report.detail("source_locally_ringed", lf.verdict.to_json());
    ledger.report.detail("target_locally_ringed", lg.verdict.to_json());
    Ok(ledger.finish(Some(morphism)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::sheaves::{constant_presheaf, constant_sheaf, FiniteTopology};

    #[test]
    fn hom_presheaf_of_constant_field_sheaves() {
        let t = FiniteTopology::pseudocircle();
        let c = constant_sheaf(&t, &base_field());
        let h = hom_presheaf(&c, &c).unwrap();
        // Natural endomorphisms of the constant sheaf: one scalar per component.
        assert_eq!(h.dim(t.full_index()), 1);
        assert_eq!(cech_h1(&h).unwrap(), 1);
    }

    #[test]
    fn recovering_examples() {
        let t = FiniteTopology::sierpinski();
        let cfg = KernelConfig::default();
        let e4 = build_grassmann_truncated(4).trivialize();
        let f = constant_sheaf(&t, &base_field());
        let g = constant_sheaf(&t, &e4);
        let ok = build_recovering_morphism(&f, &g, 3, &RecoveringOptions { kernel: cfg, ..Default::default() }).unwrap();
        assert!(ok.report.is_pass(), "{}", ok.report.to_json());
        assert!(ok.morphism.is_some());

        let m2 = build_matrix_algebra(2, None).unwrap();
        let bad = build_recovering_morphism(&g, &constant_sheaf(&t, &m2), 4, &RecoveringOptions::default()).unwrap();
        assert!(!bad.report.is_pass());
        assert_eq!(bad.report.witness.unwrap()["failed_hypothesis"], "variety_inclusion");
    }

    #[test]
    fn one_point_space() {
        let t = FiniteTopology::point();
        let m2 = build_matrix_algebra(2, None).unwrap();
        let f = constant_presheaf(&t, &base_field());
        let g = constant_presheaf(&t, &m2);
        assert!(build_recovering_morphism(&f, &g, 3, &RecoveringOptions::default()).unwrap().report.is_pass());
        let back = build_recovering_morphism(&g, &f, 2, &RecoveringOptions::default()).unwrap();
        assert_eq!(back.report.witness.unwrap()["failed_hypothesis"], "variety_inclusion");
    }

    #[test]
    fn relatively_free_presheaf_examples() {
        let cfg = KernelConfig::default();
        let t = FiniteTopology::sierpinski();
        let vars: Vec<GradedVariable> = (1..=2).map(|i| GradedVariable::new(i, GradingGroup::trivial().identity())).collect();
        let h = build_relatively_free_presheaf(&constant_presheaf(&t, &base_field()), &vars, 2, &cfg).unwrap();
        let p = h.presheaf.unwrap();
        assert_eq!(p.section(t.full_index()).dim(), 6);
        assert_eq!(p.restriction_matrix(t.full_index(), 1).unwrap(), Matrix::identity(6));

        let e4 = build_grassmann_truncated(4).trivialize();
        let e2 = build_grassmann_truncated(2).trivialize();
        // e1, e2 survive; e3, e4 and words containing them die.
        let mut q = Matrix::zeros(e2.dim(), e4.dim());
        for (c, l) in e4.labels().iter().enumerate() {
            if let Some(r) = e2.labels().iter().position(|m| m == l) {
                q.set(r, c, crate::rational::one());
            }
        }
        let sections = vec![FiniteGradedAlgebra::zero(GradingGroup::trivial()), e2, e4];
        let f = PresheafOfAlgebras::new(t.clone(), sections, BTreeMap::from([((2, 1), q)])).unwrap();
        let h = build_relatively_free_presheaf(&f, &vars, 3, &cfg).unwrap();
        assert!(h.report.is_pass(), "{}", h.report.to_json());
        let p = h.presheaf.unwrap();
        assert_eq!(p.restriction_matrix(2, 1).unwrap().rank(), p.section(1).dim());

        let m2 = build_matrix_algebra(2, None).unwrap();
        let g = PresheafOfAlgebras::new(
            t.clone(),
            vec![FiniteGradedAlgebra::zero(GradingGroup::trivial()), m2.clone(), build_grassmann_truncated(4).trivialize()],
            BTreeMap::from([((2, 1), {
                let mut m = Matrix::zeros(4, 16);
                m.set(0, 0, crate::rational::one());
                m.set(3, 0, crate::rational::one());
                m.set(1, 1, crate::rational::one());
                m
            })]),
        )
        .unwrap();
        let h = build_relatively_free_presheaf(&g, &vars, 3, &cfg).unwrap();
        assert!(h.presheaf.is_none());
    }
}
