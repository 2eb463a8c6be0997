use std::collections::{BTreeMap, BTreeSet};

use num::Zero;
use serde_json::{json, Value};

use super::kernel::{IdentitySource, KernelConfig, PreparedAlgebra};
use super::pattern::{factorial, multilinearize, patterns_of_degree, permutations, MultilinearPattern};
use super::poly::{GradedPolynomial, GradedVariable};
use crate::error::{Error, Result};
use crate::grading::{FiniteGradedAlgebra, GradingGroup};
use crate::linalg::Subspace;
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};

/// A multilinear polynomial as a pattern element: its variables, sorted,
/// become `x_1..x_n`.
pub fn as_pattern_element(group: &GradingGroup, f: &GradedPolynomial) -> Result<(MultilinearPattern, Vec<Q>, Vec<GradedVariable>)> {
    if !f.is_multilinear() {
        return Err(Error::Precondition("polynomial is not multilinear".into()));
    }
    let vars: Vec<GradedVariable> = f.variables().into_iter().collect();
    if let Some(v) = vars.iter().find(|v| !group.contains(&v.degree)) {
        return Err(Error::DegreeMismatch {
            variable: v.to_string(),
            expected: format!("an element of {group:?}"),
            found: v.degree.to_string(),
        });
    }
    let pattern = MultilinearPattern::new(group.clone(), vars.iter().map(|v| v.degree.clone()).collect());
    let renamed = GradedPolynomial::from_terms(f.terms().map(|(w, c)| {
        let w2 = w.iter().map(|v| GradedVariable::new(vars.iter().position(|u| u == v).unwrap() + 1, v.degree.clone())).collect();
        (w2, c.clone())
    }));
    let coords = pattern.coords(&renamed).expect("multilinear polynomial lies in its pattern");
    Ok((pattern, coords, vars))
}

fn check_degrees(a: &FiniteGradedAlgebra, f: &GradedPolynomial) -> Result<()> {
    for v in f.variables() {
        if !a.group().contains(&v.degree) {
            return Err(Error::DegreeMismatch {
                variable: v.to_string(),
                expected: format!("an element of {:?}", a.group()),
                found: v.degree.to_string(),
            });
        }
    }
    Ok(())
}

/// Whether `f` is a graded identity of `A`: each multilinear component is
/// evaluated on every admissible tuple of homogeneous basis elements.
pub fn is_graded_identity(f: &GradedPolynomial, a: &FiniteGradedAlgebra, cfg: &KernelConfig) -> Result<VerificationReport> {
    check_degrees(a, f)?;
    let prepared = PreparedAlgebra::new(a);
    let components = multilinearize(f);
    let mut report = VerificationReport::pass("is_graded_identity");
    report.detail("components", components.len());
    let mut total = 0u64;
    for g in &components {
        let vars: Vec<GradedVariable> = g.variables().into_iter().collect();
        cfg_degree(cfg, vars.len())?;
        let cands: Vec<Vec<usize>> = vars.iter().map(|v| a.indices_of_degree(&v.degree)).collect();
        let terms = g.num_terms().max(1) as u64;
        let count =
            prepared.count_tuples(&cands, cfg.max_ops / terms).ok_or_else(|| Error::Budget("too many substitution tuples".into()))?;
        total += count;
        let mut witness = None;
        let mut cur = Vec::new();
        prepared.walk(&cands, &mut cur, &mut |t| {
            let value = eval_basis_tuple(a, g, &vars, t);
            if value.iter().all(Zero::is_zero) {
                return true;
            }
            let subst: BTreeMap<String, String> = vars.iter().zip(t).map(|(v, &i)| (v.to_string(), a.label(i).to_string())).collect();
            witness = Some(json!({"component": g.to_string(), "substitution": subst, "value": a.describe_vec(&value)}));
            false
        });
        if let Some(w) = witness {
            report.absorb(Verdict::Fail, Some(w));
            break;
        }
    }
    report.detail("tuples", total);
    Ok(report)
}

fn cfg_degree(cfg: &KernelConfig, n: usize) -> Result<()> {
    if n > cfg.max_degree {
        return Err(Error::Budget(format!("degree {n} exceeds the limit {}", cfg.max_degree)));
    }
    Ok(())
}

fn eval_basis_tuple(a: &FiniteGradedAlgebra, g: &GradedPolynomial, vars: &[GradedVariable], t: &[usize]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.dim()];
    for (w, c) in g.terms() {
        let mut acc = a.unit().to_vec();
        for v in w {
            let i = t[vars.iter().position(|u| u == v).unwrap()];
            acc = a.mul_basis_right(&acc, i);
            if acc.iter().all(Zero::is_zero) {
                break;
            }
        }
        for (o, x) in out.iter_mut().zip(acc) {
            *o += c * x;
        }
    }
    out
}

/// Identity test through kernels, valid for oracles as well as algebras.
pub fn is_identity_in(source: &dyn IdentitySource, f: &GradedPolynomial, cfg: &KernelConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::pass("is_identity");
    report.detail("source", source.name());
    for g in multilinearize(f) {
        let (pattern, coords, _) = as_pattern_element(source.group(), &g)?;
        let k = source.kernel(&pattern, cfg)?;
        if !k.contains(&coords) {
            report.absorb(Verdict::Fail, Some(json!({"component": g.to_string(), "pattern": pattern.describe()})));
            break;
        }
    }
    Ok(report)
}

/// Truncated test of `B ∈ var(A)`: `Id(A) ⊆ Id(B)` at every pattern of
/// degree `≤ d`. Patterns are taken up to reordering, which permutes both
/// kernels the same way.
pub fn variety_contains(a: &dyn IdentitySource, b: &dyn IdentitySource, d: usize, cfg: &KernelConfig) -> Result<VerificationReport> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch(format!("{:?} vs {:?}", a.group(), b.group())));
    }
    let group = a.group().clone();
    let support: BTreeSet<_> = a.support().union(&b.support()).cloned().collect();
    let mut report = VerificationReport::pass("variety_contains").with_truncation(d);
    report.detail("container", a.name());
    report.detail("member", b.name());
    let mut checked = 0usize;
    for n in 0..=d {
        for pattern in patterns_of_degree(&group, &support, n) {
            let ka = a.kernel(&pattern, cfg)?;
            let kb = b.kernel(&pattern, cfg)?;
            checked += 1;
            let sb = kb.subspace();
            if let Some(v) = ka.basis.iter().find(|v| !sb.contains(v)) {
                report.absorb(
                    Verdict::Fail,
                    Some(json!({
                        "pattern": pattern.describe(),
                        "separating_polynomial": pattern.to_polynomial(v).to_string(),
                    })),
                );
                report.detail("patterns_checked", checked);
                return Ok(report);
            }
        }
    }
    report.detail("patterns_checked", checked);
    Ok(report)
}

/// Whether the kernels of two sources coincide at every pattern of degree `≤ d`.
pub fn same_identities(a: &dyn IdentitySource, b: &dyn IdentitySource, d: usize, cfg: &KernelConfig) -> Result<VerificationReport> {
    let ab = variety_contains(a, b, d, cfg)?;
    let ba = variety_contains(b, a, d, cfg)?;
    let mut r = VerificationReport::pass("same_identities").with_truncation(d);
    r.absorb(ab.verdict, ab.witness);
    r.absorb(ba.verdict, ba.witness);
    Ok(r)
}

/// One row of a codimension table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodimensionRow {
    pub n: usize,
    /// `Σ` over all degree sequences of the pattern codimensions.
    pub codimension: u64,
    /// Codimension of each sorted pattern.
    pub per_pattern: Vec<(MultilinearPattern, usize)>,
}

impl CodimensionRow {
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "codimension": self.codimension,
            "patterns": self.per_pattern.iter().map(|(p, c)| json!([p.describe(), c])).collect::<Vec<_>>(),
        })
    }
}

/// `c_n` for `n = 1..=n_max`. For graded sources each sorted pattern is
/// weighted by the number of degree sequences it represents.
pub fn codimension_table(source: &dyn IdentitySource, n_max: usize, cfg: &KernelConfig) -> Result<Vec<CodimensionRow>> {
    let group = source.group().clone();
    let support = source.support();
    let mut out = Vec::new();
    for n in 1..=n_max {
        let mut total = 0u64;
        let mut per = Vec::new();
        for p in patterns_of_degree(&group, &support, n) {
            let k = source.kernel(&p, cfg)?;
            let mut mult: BTreeMap<_, usize> = BTreeMap::new();
            for g in &p.degrees {
                *mult.entry(g.clone()).or_insert(0) += 1;
            }
            let orders = factorial(n) / mult.values().map(|&m| factorial(m)).product::<usize>();
            total += (orders * k.codimension) as u64;
            per.push((p, k.codimension));
        }
        out.push(CodimensionRow { n, codimension: total, per_pattern: per });
    }
    Ok(out)
}

/// The consequences of multilinear generators inside one pattern: the span
/// of `u·f(m_1,…,m_k)·v` over all words `u, v` and monomials `m_i` of
/// matching degree that together use each pattern variable once.
pub fn consequences_in_pattern(generators: &[GradedPolynomial], pattern: &MultilinearPattern) -> Result<Subspace> {
    let n = pattern.n();
    let group = &pattern.group;
    let mut span = Subspace::zero(pattern.dim());
    for f in generators {
        let (gp, gcoords, _) = as_pattern_element(group, f)?;
        let k = gp.n();
        if k == 0 || k > n {
            continue;
        }
        let gpoly = gp.to_polynomial(&gcoords);
        for perm in permutations(n) {
            for cuts in block_cuts(n, k) {
                // cuts: start of m_1 … end of m_k; u = perm[..cuts[0]], v = perm[cuts[k]..].
                let blocks: Vec<&[usize]> = (0..k).map(|i| &perm[cuts[i]..cuts[i + 1]]).collect();
                let degree_ok = blocks.iter().zip(&gp.degrees).all(|(b, g)| {
                    let d = b.iter().fold(group.identity(), |acc, &x| group.op(&acc, &pattern.degrees[x]));
                    &d == g
                });
                if !degree_ok {
                    continue;
                }
                let mut coords = vec![Q::zero(); pattern.dim()];
                for (w, c) in gpoly.terms() {
                    let mut word: Vec<usize> = perm[..cuts[0]].to_vec();
                    for v in w {
                        word.extend_from_slice(blocks[v.index - 1]);
                    }
                    word.extend_from_slice(&perm[cuts[k]..]);
                    coords[super::pattern::permutation_rank(&word)] += c;
                }
                span.insert(&coords);
            }
        }
    }
    Ok(span)
}

/// Positions `c_0 ≤ c_1 < … < c_k` splitting `0..n` into a prefix, `k`
/// nonempty blocks and a suffix.
fn block_cuts(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k + 1 {
            out.push(cur.clone());
            return;
        }
        let start = match cur.last() {
            None => 0,
            Some(&c) => c + 1,
        };
        let remaining = k + 1 - cur.len() - 1;
        for c in start..=n.saturating_sub(remaining) {
            cur.push(c);
            rec(n, k, cur, out);
            cur.pop();
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;
    use crate::identities::kernel::GrassmannOracle;

    fn vars(g: &crate::grading::GroupElem, n: usize) -> Vec<GradedVariable> {
        (1..=n).map(|i| GradedVariable::new(i, g.clone())).collect()
    }

    #[test]
    fn classical_identities() {
        let cfg = KernelConfig::default();
        let e = GradingGroup::trivial().identity();
        let comm = GradedPolynomial::left_normed(&vars(&e, 2));
        assert!(is_graded_identity(&comm, &build_truncated_polynomial(2).unwrap(), &cfg).unwrap().is_pass());
        let triple = GradedPolynomial::left_normed(&vars(&e, 3));
        let e5 = build_grassmann_truncated(5).trivialize();
        assert!(is_graded_identity(&triple, &e5, &cfg).unwrap().is_pass());
        let s4 = GradedPolynomial::standard(&vars(&e, 4));
        assert!(is_graded_identity(&s4, &build_matrix_algebra(2, None).unwrap(), &cfg).unwrap().is_pass());
        let r = is_graded_identity(&s4, &build_matrix_algebra(3, None).unwrap(), &cfg).unwrap();
        assert!(!r.is_pass());
        assert!(r.witness.unwrap()["substitution"].is_object());
    }

    #[test]
    fn kernel_and_direct_tests_agree() {
        let cfg = KernelConfig::default();
        let e = GradingGroup::trivial().identity();
        let m2 = build_matrix_algebra(2, None).unwrap();
        for f in [
            GradedPolynomial::standard(&vars(&e, 3)),
            GradedPolynomial::standard(&vars(&e, 4)),
            GradedPolynomial::left_normed(&vars(&e, 2)),
        ] {
            let direct = is_graded_identity(&f, &m2, &cfg).unwrap().verdict;
            let via_kernel = is_identity_in(&m2, &f, &cfg).unwrap().verdict;
            assert_eq!(direct, via_kernel);
        }
    }

    #[test]
    fn variety_examples() {
        let cfg = KernelConfig::default();
        let m2 = build_matrix_algebra(2, None).unwrap();
        let f = base_field();
        assert!(variety_contains(&m2, &f, 4, &cfg).unwrap().is_pass());
        let r = variety_contains(&f, &m2, 2, &cfg).unwrap();
        assert!(!r.is_pass());
        assert_eq!(r.witness.unwrap()["separating_polynomial"], "1*x1*x2 + -1*x2*x1");
        let e4 = build_grassmann_truncated(4);
        assert!(variety_contains(&GrassmannOracle::canonical(), &e4, 3, &cfg).unwrap().is_pass());
        assert!(matches!(variety_contains(&m2, &e4, 2, &cfg), Err(Error::GroupMismatch(_))));
    }

    #[test]
    fn codimensions() {
        let cfg = KernelConfig::default();
        let c: Vec<u64> = codimension_table(&base_field(), 4, &cfg).unwrap().iter().map(|r| r.codimension).collect();
        assert_eq!(c, vec![1, 1, 1, 1]);
        let c: Vec<u64> = codimension_table(&GrassmannOracle::ungraded(), 4, &cfg).unwrap().iter().map(|r| r.codimension).collect();
        assert_eq!(c, vec![1, 2, 4, 8]);
        let c: Vec<u64> =
            codimension_table(&build_matrix_algebra(2, None).unwrap(), 2, &cfg).unwrap().iter().map(|r| r.codimension).collect();
        assert_eq!(c, vec![1, 2]);
    }

    #[test]
    fn commutator_consequences_match_base_field() {
        let e = GradingGroup::trivial().identity();
        let comm = GradedPolynomial::left_normed(&vars(&e, 2));
        let p = MultilinearPattern::ungraded(3);
        let cons = consequences_in_pattern(&[comm], &p).unwrap();
        let k = base_field().kernel(&p, &KernelConfig::default()).unwrap();
        assert_eq!(cons, k.subspace());
    }
}
