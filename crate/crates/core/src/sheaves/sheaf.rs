use std::collections::BTreeMap;

use num::Zero;
use serde_json::json;

use super::presheaf::{PresheafMorphism, PresheafOfAlgebras};
use super::topology::members;
use crate::error::Result;
use crate::grading::{center_radical_local, direct_product, subalgebra, FiniteGradedAlgebra, GradedAlgebraMorphism};
use crate::linalg::{Echelon, Matrix, Subspace};
use crate::par::{self, Exec};
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};

const MAX_SUBOPENS_FOR_FULL_ENUMERATION: usize = 20;

/// Irredundant covers of open `u` by proper subopens: antichains whose
/// union is `U` and from which no member can be dropped.
pub fn irredundant_covers(f: &PresheafOfAlgebras, u: usize) -> Vec<Vec<usize>> {
    let t = f.topology();
    let target = t.open(u);
    let subs: Vec<usize> = t.subopens(u).into_iter().filter(|&v| v != u && t.open(v) != 0).collect();
    if target == 0 {
        return vec![Vec::new()];
    }
    if subs.len() > MAX_SUBOPENS_FOR_FULL_ENUMERATION {
        // Fall back to the covers by maximal proper subopens and by minimal neighbourhoods.
        let maximal: Vec<usize> = subs.iter().copied().filter(|&v| !subs.iter().any(|&w| w != v && t.contains(w, v))).collect();
        let mut covers = Vec::new();
        for cand in [maximal, members(target).into_iter().map(|x| t.minimal_open_index(x)).collect()] {
            let mut c = cand;
            c.sort_unstable();
            c.dedup();
            if c.iter().fold(0u64, |acc, &v| acc | t.open(v)) == target && !c.contains(&u) {
                covers.push(c);
            }
        }
        return covers;
    }
    let mut out = Vec::new();
    for mask in 1u64..1 << subs.len() {
        let c: Vec<usize> = (0..subs.len()).filter(|&i| mask >> i & 1 == 1).map(|i| subs[i]).collect();
        let union = c.iter().fold(0u64, |acc, &v| acc | t.open(v));
        if union != target {
            continue;
        }
        let antichain = c.iter().all(|&a| c.iter().all(|&b| a == b || !t.contains(a, b)));
        let irredundant =
            (0..c.len()).all(|i| c.iter().enumerate().filter(|&(j, _)| j != i).fold(0u64, |acc, (_, &v)| acc | t.open(v)) != target);
        if antichain && irredundant {
            out.push(c);
        }
    }
    out
}

struct CoverCheck {
    injective: bool,
    glues: bool,
    witness: Option<serde_json::Value>,
}

fn check_cover(f: &PresheafOfAlgebras, u: usize, cover: &[usize]) -> Result<CoverCheck> {
    let t = f.topology();
    let du = f.section(u).dim();
    let offsets: Vec<usize> = cover
        .iter()
        .scan(0, |acc, &v| {
            let o = *acc;
            *acc += f.section(v).dim();
            Some(o)
        })
        .collect();
    let total: usize = cover.iter().map(|&v| f.section(v).dim()).sum();
    let blocks: Vec<Matrix> = cover.iter().map(|&v| f.restriction_matrix(u, v)).collect::<Result<_>>()?;
    let stacked = Matrix::vstack(&blocks.iter().collect::<Vec<_>>(), du);
    let rank = stacked.rank();
    if rank < du {
        let kernel = stacked.nullspace();
        return Ok(CoverCheck {
            injective: false,
            glues: true,
            witness: Some(json!({
                "axiom": "monopresheaf",
                "open": f.open_name(u),
                "cover": cover.iter().map(|&v| f.open_name(v)).collect::<Vec<_>>(),
                "section": f.section(u).describe_vec(&kernel[0]),
            })),
        });
    }
    // Compatible families: s_i|_{ij} = s_j|_{ij}.
    let mut eqs = Echelon::new(total);
    for (i, &vi) in cover.iter().enumerate() {
        for (j, &vj) in cover.iter().enumerate().skip(i + 1) {
            let w = t.intersection_index(vi, vj).expect("valid topology");
            let ri = f.restriction_matrix(vi, w)?;
            let rj = f.restriction_matrix(vj, w)?;
            for r in 0..f.section(w).dim() {
                let mut row = vec![Q::zero(); total];
                for c in 0..ri.cols() {
                    row[offsets[i] + c] += ri.get(r, c);
                }
                for c in 0..rj.cols() {
                    row[offsets[j] + c] -= rj.get(r, c);
                }
                eqs.insert(&row);
            }
        }
    }
    let compatible = total - eqs.rank();
    if compatible > rank {
        let image = stacked.column_space();
        let family = eqs.nullspace().into_iter().find(|v| !image.contains(v)).expect("dimension gap");
        return Ok(CoverCheck {
            injective: true,
            glues: false,
            witness: Some(json!({
                "axiom": "gluing",
                "open": f.open_name(u),
                "cover": cover.iter().map(|&v| f.open_name(v)).collect::<Vec<_>>(),
                "family": crate::rational::fmt_vec(&family),
            })),
        });
    }
    Ok(CoverCheck { injective: true, glues: true, witness: None })
}

/// Monopresheaf and gluing along every irredundant cover of every open.
pub fn check_sheaf(f: &PresheafOfAlgebras) -> Result<VerificationReport> {
    check_sheaf_with(f, Exec::Sequential)
}

pub fn check_sheaf_with(f: &PresheafOfAlgebras, exec: Exec) -> Result<VerificationReport> {
    let t = f.topology();
    let mut report = VerificationReport::pass("check_sheaf");
    let mut mono = true;
    let mut glue = true;
    let mut covers_checked = 0usize;
    let jobs: Vec<(usize, Vec<usize>)> = (0..t.n_opens()).flat_map(|u| irredundant_covers(f, u).into_iter().map(move |c| (u, c))).collect();
    let results = par::try_map(exec, jobs, |(u, c)| {
        if c.is_empty() {
            // The empty cover of ∅: the section there must be zero.
            let ok = f.section(u).dim() == 0;
            return Ok(CoverCheck {
                injective: ok,
                glues: true,
                witness: (!ok).then(|| json!({"axiom": "monopresheaf", "open": [], "cover": []})),
            });
        }
        check_cover(f, u, &c)
    })?;
    for r in results {
        covers_checked += 1;
        mono &= r.injective;
        glue &= r.glues;
        if r.witness.is_some() {
            report.absorb(Verdict::Fail, r.witness);
        }
    }
    report.detail("covers_checked", covers_checked);
    report.detail("monopresheaf", mono);
    report.detail("gluing", glue);
    Ok(report)
}

/// The stalk at `x`, realized as the section over the minimal open `U_x`.
#[derive(Clone, Debug)]
pub struct Stalk {
    pub point: usize,
    pub open: usize,
    pub algebra: FiniteGradedAlgebra,
    /// `π_{U,x}` for every open `U ∋ x`, by open index.
    pub projections: BTreeMap<usize, Matrix>,
}

pub fn stalk_at(f: &PresheafOfAlgebras, x: usize) -> Result<Stalk> {
    let t = f.topology();
    let ux = t.minimal_open_index(x);
    let mut projections = BTreeMap::new();
    for u in 0..t.n_opens() {
        if t.open(u) >> x & 1 == 1 {
            projections.insert(u, f.restriction_matrix(u, ux)?);
        }
    }
    Ok(Stalk { point: x, open: ux, algebra: f.section(ux).clone(), projections })
}

impl Stalk {
    /// `π_V ∘ F(U→V) = π_U` for all `x ∈ V ⊆ U`.
    pub fn verify_cocone(&self, f: &PresheafOfAlgebras) -> Result<VerificationReport> {
        let t = f.topology();
        for (&u, pu) in &self.projections {
            for (&v, pv) in &self.projections {
                if u != v && t.contains(u, v) && pv.mul(&f.restriction_matrix(u, v)?) != *pu {
                    return Ok(VerificationReport::fail("stalk_cocone", json!({"from": f.open_name(u), "to": f.open_name(v)})));
                }
            }
        }
        Ok(VerificationReport::pass("stalk_cocone"))
    }

    /// Given a test cocone `g_U : F(U) → T` (for every `U ∋ x`), checks it
    /// factors through the stalk as `g_U = g_{U_x} ∘ π_U`.
    pub fn verify_universal(&self, cocone: &BTreeMap<usize, Matrix>) -> VerificationReport {
        let Some(mediating) = cocone.get(&self.open) else {
            return VerificationReport::fail("stalk_universal", json!({"missing": "component at the minimal open"}));
        };
        for (u, pu) in &self.projections {
            match cocone.get(u) {
                Some(g) if *g == mediating.mul(pu) => {}
                _ => return VerificationReport::fail("stalk_universal", json!({"open_index": u})),
            }
        }
        VerificationReport::pass("stalk_universal")
    }

    /// The germ `[s]_x` of a section over `u ∋ x`.
    pub fn germ(&self, u: usize, s: &[Q]) -> Option<Vec<Q>> {
        self.projections.get(&u).map(|p| p.mul_vec(s))
    }
}

/// Dimension of the colimit of `F(U)` over opens `U ∋ x`, computed from
/// the raw germ relations `s ~ s|_V`. Used as a cross-check of [`stalk_at`].
pub fn germ_colimit_dim(f: &PresheafOfAlgebras, x: usize) -> Result<usize> {
    let t = f.topology();
    let nbhds: Vec<usize> = (0..t.n_opens()).filter(|&u| t.open(u) >> x & 1 == 1).collect();
    let mut offsets = BTreeMap::new();
    let mut total = 0;
    for &u in &nbhds {
        offsets.insert(u, total);
        total += f.section(u).dim();
    }
    let mut rel = Echelon::new(total);
    for &u in &nbhds {
        for &v in &nbhds {
            if u == v || !t.contains(u, v) {
                continue;
            }
            let r = f.restriction_matrix(u, v)?;
            for c in 0..f.section(u).dim() {
                let mut row = vec![Q::zero(); total];
                row[offsets[&u] + c] += crate::rational::one();
                for k in 0..r.rows() {
                    row[offsets[&v] + k] -= r.get(k, c);
                }
                rel.insert(&row);
            }
        }
    }
    Ok(total - rel.rank())
}

/// `Sff(F)` and the unit `η : F → Sff(F)`.
#[derive(Clone, Debug)]
pub struct Sheafification {
    pub sheaf: PresheafOfAlgebras,
    pub eta: PresheafMorphism,
    /// For each open, the embedding of `Sff(F)(U)` into `Π_{x∈U} F(U_x)`.
    pub embeddings: Vec<Matrix>,
}

/// Compatible families of local sections over minimal neighbourhoods.
pub fn sheafify(f: &PresheafOfAlgebras) -> Result<Sheafification> {
    let t = f.topology();
    let n = t.n_opens();
    let group = f.group();
    let mut sections = Vec::with_capacity(n);
    let mut embeddings = Vec::with_capacity(n);
    let mut spans = Vec::with_capacity(n);
    let mut layouts: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    for u in 0..n {
        let pts = members(t.open(u));
        let locals: Vec<usize> = pts.iter().map(|&x| t.minimal_open_index(x)).collect();
        let mut layout = Vec::new();
        let mut off = 0;
        for &l in &locals {
            layout.push((off, l));
            off += f.section(l).dim();
        }
        if pts.is_empty() {
            sections.push(FiniteGradedAlgebra::zero(group.clone()));
            embeddings.push(Matrix::zeros(0, 0));
            spans.push(Subspace::zero(0));
            layouts.push(layout);
            continue;
        }
        let factors: Vec<FiniteGradedAlgebra> = locals.iter().map(|&l| f.section(l).clone()).collect();
        let product = direct_product(&factors, None)?;
        // s_y = s_x|_{U_y} for every y ∈ U_x.
        let mut eqs = Echelon::new(off);
        for (i, &x) in pts.iter().enumerate() {
            for (j, &y) in pts.iter().enumerate() {
                if i == j || t.minimal_open(x) >> y & 1 == 0 {
                    continue;
                }
                let (ox, lx) = layout[i];
                let (oy, ly) = layout[j];
                let r = f.restriction_matrix(lx, ly)?;
                for k in 0..r.rows() {
                    let mut row = vec![Q::zero(); off];
                    for c in 0..r.cols() {
                        row[ox + c] += r.get(k, c);
                    }
                    row[oy + k] -= crate::rational::one();
                    eqs.insert(&row);
                }
            }
        }
        let span = Subspace::span(off, eqs.nullspace());
        let (alg, incl) = subalgebra(&product, &span, product.unit().to_vec())?;
        sections.push(alg);
        embeddings.push(incl);
        spans.push(span);
        layouts.push(layout);
    }
    let mut restrictions = BTreeMap::new();
    let mut eta = Vec::with_capacity(n);
    for u in 0..n {
        let pts_u = members(t.open(u));
        for v in 0..n {
            if u == v || !t.contains(u, v) || t.open(v) == 0 {
                continue;
            }
            let pts_v = members(t.open(v));
            let dim_v = spans[v].ambient();
            let mut m = Matrix::zeros(sections[v].dim(), sections[u].dim());
            for c in 0..sections[u].dim() {
                let fam = embeddings[u].col(c);
                let mut sub = vec![Q::zero(); dim_v];
                for (j, y) in pts_v.iter().enumerate() {
                    let i = pts_u.iter().position(|p| p == y).unwrap();
                    let (ou, l) = layouts[u][i];
                    let (ov, _) = layouts[v][j];
                    let len = f.section(l).dim();
                    sub[ov..ov + len].clone_from_slice(&fam[ou..ou + len]);
                }
                let coords = spans[v].coords(&sub).expect("restricted family is compatible");
                for (r, x) in coords.into_iter().enumerate() {
                    m.set(r, c, x);
                }
            }
            restrictions.insert((u, v), m);
        }
        // η_U(s) = (s|_{U_x})_x.
        let mut e = Matrix::zeros(sections[u].dim(), f.section(u).dim());
        if !pts_u.is_empty() {
            for c in 0..f.section(u).dim() {
                let mut fam = vec![Q::zero(); spans[u].ambient()];
                let s = crate::linalg::unit_vec(f.section(u).dim(), c);
                for (i, _) in pts_u.iter().enumerate() {
                    let (o, l) = layouts[u][i];
                    let local = f.restrict(u, l, &s)?;
                    for (k, val) in local.into_iter().enumerate() {
                        fam[o + k] = val;
                    }
                }
                let coords = spans[u].coords(&fam).expect("restrictions of a section are compatible");
                for (r, x) in coords.into_iter().enumerate() {
                    e.set(r, c, x);
                }
            }
        }
        eta.push(e);
    }
    let sheaf = PresheafOfAlgebras::new(t.clone(), sections, restrictions)?;
    let eta = PresheafMorphism::new(f.clone(), sheaf.clone(), eta)?;
    Ok(Sheafification { sheaf, eta, embeddings })
}

/// Explicit isomorphism `Sff(F)_x ≅ F_x` (the inverse of `η` at `U_x`).
pub fn stalk_isomorphism(f: &PresheafOfAlgebras, sff: &Sheafification, x: usize) -> Result<GradedAlgebraMorphism> {
    let ux = f.topology().minimal_open_index(x);
    let eta = sff.eta.components[ux].clone();
    let inv = eta.inverse().ok_or_else(|| crate::Error::Precondition("η is not invertible at a minimal open".into()))?;
    GradedAlgebraMorphism::new(sff.sheaf.section(ux).clone(), f.section(ux).clone(), inv)
}

/// Runs the locality test on every stalk.
pub fn check_locally_ringed(f: &PresheafOfAlgebras) -> Result<VerificationReport> {
    let t = f.topology();
    let mut report = VerificationReport::pass("check_locally_ringed");
    let mut per_point = serde_json::Map::new();
    for x in 0..t.n_points() {
        let stalk = stalk_at(f, x)?;
        let loc = center_radical_local(&stalk.algebra);
        per_point.insert(
            t.points()[x].clone(),
            json!({
                "local": loc.is_local.to_json(),
                "stalk_dim": stalk.algebra.dim(),
                "radical_dim": loc.radical.len(),
                "reason": loc.reason,
            }),
        );
        if loc.is_local != Verdict::Pass {
            report.absorb(loc.is_local, Some(json!({"point": t.points()[x], "detail": loc.witness})));
        }
    }
    report.detail("stalks", serde_json::Value::Object(per_point));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::sheaves::presheaf::{constant_presheaf, constant_sheaf};
    use crate::sheaves::topology::FiniteTopology;

    fn defective() -> PresheafOfAlgebras {
        let t = FiniteTopology::discrete(2);
        let f = base_field();
        let ff = direct_product(&[f.clone(), f.clone()], None).unwrap();
        let fff = direct_product(&[f.clone(), f.clone(), f.clone()], None).unwrap();
        let (a, b, x) = (t.index_of(1).unwrap(), t.index_of(2).unwrap(), t.full_index());
        let mut pa = Matrix::zeros(1, 3);
        pa.set(0, 0, crate::rational::one());
        let mut pb = Matrix::zeros(1, 3);
        pb.set(0, 1, crate::rational::one());
        let _ = ff;
        let sections = vec![FiniteGradedAlgebra::zero(f.group().clone()), f.clone(), f.clone(), fff];
        PresheafOfAlgebras::new(t, sections, BTreeMap::from([((x, a), pa), ((x, b), pb)])).unwrap()
    }

    #[test]
    fn product_sheaf_and_defect() {
        let t = FiniteTopology::discrete(2);
        let s = constant_sheaf(&t, &base_field());
        assert!(check_sheaf(&s).unwrap().is_pass());
        let d = defective();
        let r = check_sheaf(&d).unwrap();
        assert!(!r.is_pass());
        assert_eq!(r.witness.unwrap()["axiom"], "monopresheaf");
        let sff = sheafify(&d).unwrap();
        assert_eq!(sff.sheaf.section(t.full_index()).dim(), 2);
        assert!(check_sheaf(&sff.sheaf).unwrap().is_pass());
        assert!(!sff.eta.is_isomorphism());
        assert!(sff.eta.verify().unwrap().is_pass());
    }

    #[test]
    fn sierpinski_is_always_a_sheaf() {
        let t = FiniteTopology::sierpinski();
        let f = constant_presheaf(&t, &build_matrix_algebra(2, None).unwrap());
        assert!(check_sheaf(&f).unwrap().is_pass());
        let st = stalk_at(&f, 1).unwrap();
        assert_eq!(st.open, t.full_index());
        assert!(st.verify_cocone(&f).unwrap().is_pass());
        let sff = sheafify(&f).unwrap();
        assert!(sff.eta.is_isomorphism());
    }

    #[test]
    fn literal_constant_presheaf_fails_gluing() {
        let t = FiniteTopology::discrete(2);
        let f = constant_presheaf(&t, &base_field());
        let r = check_sheaf(&f).unwrap();
        assert_eq!(r.witness.unwrap()["axiom"], "gluing");
    }

    #[test]
    fn germs_and_colimit_oracle() {
        let t = FiniteTopology::pseudocircle();
        let f = constant_sheaf(&t, &build_truncated_polynomial(2).unwrap());
        for x in 0..4 {
            let st = stalk_at(&f, x).unwrap();
            assert_eq!(germ_colimit_dim(&f, x).unwrap(), st.algebra.dim());
        }
        // [s]_x + 2[t]_x = π(s|_{U∩V} + 2 t|_{U∩V}) with x = a, U = {a,b,x}, V = {a,b,y}.
        let st = stalk_at(&f, 0).unwrap();
        let (u, v) = (t.index_of(0b0111).unwrap(), t.index_of(0b1011).unwrap());
        let w = t.intersection_index(u, v).unwrap();
        let s: Vec<Q> = (0..f.section(u).dim()).map(|i| Q::from_integer((i as i64 + 1).into())).collect();
        let tt: Vec<Q> = (0..f.section(v).dim()).map(|i| Q::from_integer((3 - i as i64).into())).collect();
        let two = crate::rational::q(2);
        let lhs: Vec<Q> = st.germ(u, &s).unwrap().iter().zip(st.germ(v, &tt).unwrap()).map(|(a, b)| a + &two * b).collect();
        let sw = f.restrict(u, w, &s).unwrap();
        let tw = f.restrict(v, w, &tt).unwrap();
        let sum: Vec<Q> = sw.iter().zip(&tw).map(|(a, b)| a + &two * b).collect();
        assert_eq!(lhs, st.germ(w, &sum).unwrap());
    }

    #[test]
    fn locally_ringed_examples() {
        let t = FiniteTopology::sierpinski();
        let e4 = build_grassmann_truncated(4);
        assert!(check_locally_ringed(&constant_sheaf(&t, &e4)).unwrap().is_pass());
        let m2 = build_matrix_algebra(2, None).unwrap();
        assert_eq!(check_locally_ringed(&constant_sheaf(&t, &m2)).unwrap().verdict, Verdict::Fail);
        let p3 = build_truncated_polynomial(3).unwrap();
        assert!(check_locally_ringed(&constant_sheaf(&t, &p3)).unwrap().is_pass());
    }
}
