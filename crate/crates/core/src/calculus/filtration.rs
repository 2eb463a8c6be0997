use num::{One, Zero};
use serde_json::json;

use crate::error::Result;
use crate::grading::{commutator_space, ideal_closure, product_space, quotient_algebra, FiniteGradedAlgebra, GradingGroup};
use crate::linalg::{unit_vec, Echelon, Subspace};
use crate::rational::Q;
use crate::report::{Verdict, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiltrationKind {
    OddIdeal,
    Commutator,
}

impl FiltrationKind {
    pub fn label(self) -> &'static str {
        match self {
            FiltrationKind::OddIdeal => "odd-ideal",
            FiltrationKind::Commutator => "commutator",
        }
    }
}

/// `A = F⁰ ⊇ F¹ ⊇ …`, each a two-sided ideal.
#[derive(Clone, Debug)]
pub struct FiltrationChain {
    pub algebra: FiniteGradedAlgebra,
    pub kind: FiltrationKind,
    /// `steps[i]` is `Fⁱ`; `steps[0]` is the whole algebra.
    pub steps: Vec<Subspace>,
    /// The chain ended at zero (rather than stabilizing or running out of depth).
    pub reaches_zero: bool,
}

impl FiltrationChain {
    pub fn dims(&self) -> Vec<usize> {
        self.steps.iter().map(Subspace::dim).collect()
    }

    /// Every step is an ideal and `Fⁱ·Fʲ ⊆ F^{i+j}` wherever both sides are listed.
    pub fn verify(&self) -> VerificationReport {
        let a = &self.algebra;
        let n = a.dim();
        let mut report = VerificationReport::pass("filtration");
        for (i, f) in self.steps.iter().enumerate() {
            let ideal =
                f.basis().iter().all(|v| (0..n).all(|k| f.contains(&a.mul_basis_left(k, v)) && f.contains(&a.mul_basis_right(v, k))));
            if !ideal {
                report.absorb(Verdict::Fail, Some(json!({"step": i, "reason": "not an ideal"})));
                return report;
            }
        }
        let last = self.steps.len() - 1;
        for i in 0..=last {
            for j in 0..=last - i {
                if !product_space(a, &self.steps[i], &self.steps[j]).is_subspace_of(&self.steps[i + j]) {
                    report.absorb(Verdict::Fail, Some(json!({"steps": [i, j], "reason": "not multiplicative"})));
                    return report;
                }
            }
        }
        report
    }
}

fn powers(a: &FiniteGradedAlgebra, j: Subspace, kind: FiltrationKind, max_steps: usize) -> FiltrationChain {
    let n = a.dim();
    let mut steps = vec![Subspace::full(n), j.clone()];
    let mut reaches_zero = j.dim() == 0;
    while !reaches_zero && steps.len() <= max_steps {
        let next = product_space(a, steps.last().unwrap(), &j);
        if next == *steps.last().unwrap() {
            break;
        }
        reaches_zero = next.dim() == 0;
        steps.push(next);
    }
    FiltrationChain { algebra: a.clone(), kind, steps, reaches_zero }
}

/// Powers of the ideal generated by the odd part of a `ℤ₂`-graded algebra.
pub fn odd_ideal_filtration(a: &FiniteGradedAlgebra) -> FiltrationChain {
    let id = a.group().identity();
    let odd: Vec<Vec<Q>> = (0..a.dim()).filter(|&i| a.degree(i) != &id).map(|i| a.basis_vec(i)).collect();
    let j = ideal_closure(a, odd);
    powers(a, j, FiltrationKind::OddIdeal, a.dim() + 1)
}

/// The associated graded algebra `⊕ Fⁱ/F^{i+1}`, graded by filtration level.
#[derive(Clone, Debug)]
pub struct AssociatedGraded {
    pub algebra: FiniteGradedAlgebra,
    pub level_dims: Vec<usize>,
    /// Representatives in the original algebra, one per basis element.
    pub representatives: Vec<Vec<Q>>,
}

pub fn associated_graded(chain: &FiltrationChain) -> Result<AssociatedGraded> {
    let a = &chain.algebra;
    let n = a.dim();
    let mut steps = chain.steps.clone();
    if steps.last().map(Subspace::dim) != Some(0) {
        steps.push(Subspace::zero(n));
    }
    let levels = steps.len() - 1;
    let mut reps: Vec<Vec<Q>> = Vec::new();
    let mut level_of: Vec<usize> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut solvers: Vec<(Echelon, usize, usize)> = Vec::new();
    for i in 0..levels {
        let next = &steps[i + 1];
        let mut span = next.clone();
        let first = reps.len();
        // Prefer standard basis vectors so that labels carry over.
        let candidates = (0..n).map(|k| (Some(k), unit_vec(n, k))).chain(steps[i].basis().into_iter().map(|v| (None, v)));
        for (k, v) in candidates {
            if steps[i].contains(&v) && span.insert(&v) {
                labels.push(match k {
                    Some(k) => a.label(k).to_string(),
                    None => format!("g{}_{}", i, reps.len() - first),
                });
                reps.push(v);
                level_of.push(i);
            }
        }
        let count = reps.len() - first;
        let mut solver = Echelon::new(n + count);
        for b in next.basis() {
            let mut row = b;
            row.extend(std::iter::repeat_n(Q::zero(), count));
            solver.insert(&row);
        }
        for t in 0..count {
            let mut row = reps[first + t].clone();
            row.extend((0..count).map(|s| if s == t { Q::one() } else { Q::zero() }));
            solver.insert(&row);
        }
        solvers.push((solver, first, count));
    }
    let total = reps.len();
    let mut constants = Vec::new();
    for x in 0..total {
        for y in 0..total {
            let lvl = level_of[x] + level_of[y];
            if lvl >= levels {
                continue;
            }
            let prod = a.mul(&reps[x], &reps[y]);
            let (solver, first, count) = &solvers[lvl];
            let mut probe = prod;
            probe.extend(std::iter::repeat_n(Q::zero(), *count));
            let red = solver.reduce(&probe);
            debug_assert!(red[..n].iter().all(Zero::is_zero), "product left its filtration level");
            for t in 0..*count {
                let c = -red[n + t].clone();
                if !c.is_zero() {
                    constants.push((x, y, first + t, c));
                }
            }
        }
    }
    let z = GradingGroup::integers();
    let degrees = level_of.iter().map(|&l| z.elem(&[l as i64]).expect("rank one")).collect();
    let mut unit = vec![Q::zero(); total];
    if total > 0 {
        // The unit lies in level 0 unless F¹ is everything.
        let (solver, first, count) = &solvers[0];
        let mut probe = a.unit().to_vec();
        probe.extend(std::iter::repeat_n(Q::zero(), *count));
        let red = solver.reduce(&probe);
        for t in 0..*count {
            unit[first + t] = -red[n + t].clone();
        }
    }
    let level_dims = (0..levels).map(|i| level_of.iter().filter(|&&l| l == i).count()).collect();
    let algebra = FiniteGradedAlgebra::new(z, labels, degrees, constants, unit)?;
    Ok(AssociatedGraded { algebra, level_dims, representatives: reps })
}

/// Result of [`commutator_filtration`].
#[derive(Clone, Debug)]
pub struct CommutatorFiltration {
    pub chain: FiltrationChain,
    /// `A / F⁻¹`.
    pub abelianization: FiniteGradedAlgebra,
    /// Largest `k` with `F⁻ᵏ ≠ 0`, when the chain reaches zero within depth.
    pub order: Option<usize>,
    pub report: VerificationReport,
}

/// `F⁻¹` is the ideal generated by `[A, A]` and `F⁻ᵏ = (F⁻¹)ᵏ`.
pub fn commutator_filtration(a: &FiniteGradedAlgebra, k_max: usize) -> Result<CommutatorFiltration> {
    let f1 = ideal_closure(a, commutator_space(a).into_basis());
    let chain = powers(a, f1.clone(), FiltrationKind::Commutator, k_max.max(1));
    let order = chain.reaches_zero.then(|| chain.steps.len() - 2);
    let q = quotient_algebra(a, &f1)?;
    let mut report = VerificationReport::pass("commutator_filtration");
    report.detail("dims", chain.dims());
    report.detail("k_max", k_max);
    report.detail("abelianization_dim", q.algebra.dim());
    match order {
        Some(k) => report.detail("nilcommutative_order", k),
        None => {
            report.detail("nilcommutative_order", format!("> {k_max}"));
            report.absorb(Verdict::Fail, Some(json!({"reason": format!("order > {k_max}"), "dims": chain.dims()})));
        }
    }
    if q.algebra.dim() == 0 {
        report.note("abelianization is zero: the unit lies in the commutator ideal");
    }
    if !q.algebra.is_commutative() {
        report.absorb(Verdict::Fail, Some(json!({"reason": "abelianization is not commutative"})));
    }
    Ok(CommutatorFiltration { chain, abelianization: q.algebra, order, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::*;

    #[test]
    fn odd_ideal_of_e3() {
        let e3 = build_grassmann_truncated(3);
        let chain = odd_ideal_filtration(&e3);
        assert_eq!(chain.dims(), vec![8, 7, 4, 1, 0]);
        assert!(chain.verify().is_pass());
        let gr = associated_graded(&chain).unwrap();
        assert_eq!(gr.level_dims, vec![1, 3, 3, 1]);
        assert_eq!(gr.algebra.dim(), 8);
        assert!(validate_algebra(&gr.algebra).is_pass());
        // Same structure constants with the labels carried over.
        assert_eq!(gr.algebra.labels(), e3.labels());
        let iso = GradedAlgebraMorphism::new(e3.trivialize(), gr.algebra.trivialize(), crate::linalg::Matrix::identity(8)).unwrap();
        assert!(verify_isomorphism(&iso).is_pass());
    }

    #[test]
    fn purely_even() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let chain = odd_ideal_filtration(&m2);
        assert_eq!(chain.dims(), vec![4, 0]);
        let gr = associated_graded(&chain).unwrap();
        assert_eq!(gr.algebra.dim(), 4);
    }

    #[test]
    fn commutator_examples() {
        let ut2 = build_upper_triangular(2).unwrap();
        let c = commutator_filtration(&ut2, 4).unwrap();
        assert_eq!(c.chain.dims(), vec![3, 1, 0]);
        assert_eq!(c.order, Some(1));
        assert_eq!(c.abelianization.dim(), 2);
        let p = build_truncated_polynomial(3).unwrap();
        let c = commutator_filtration(&p, 4).unwrap();
        assert_eq!(c.order, Some(0));
        assert_eq!(c.abelianization.dim(), 3);
        let m2 = build_matrix_algebra(2, None).unwrap();
        let c = commutator_filtration(&m2, 4).unwrap();
        assert_eq!(c.order, None);
        assert_eq!(c.abelianization.dim(), 0);
    }
}
