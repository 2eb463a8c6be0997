use num::Zero;
use serde_json::json;

use super::algebra::FiniteGradedAlgebra;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rational::Q;
use crate::report::VerificationReport;

/// A linear map between graded algebras, `target.dim() × source.dim()`.
/// Construction checks only the shape; [`verify_morphism`] checks the axioms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedAlgebraMorphism {
    pub source: FiniteGradedAlgebra,
    pub target: FiniteGradedAlgebra,
    pub matrix: Matrix,
}

impl GradedAlgebraMorphism {
    pub fn new(source: FiniteGradedAlgebra, target: FiniteGradedAlgebra, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(Error::Structural(format!(
                "morphism matrix is {}×{}, expected {}×{}",
                matrix.rows(),
                matrix.cols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(Self { source, target, matrix })
    }

    pub fn identity(a: &FiniteGradedAlgebra) -> Self {
        Self { source: a.clone(), target: a.clone(), matrix: Matrix::identity(a.dim()) }
    }

    /// The unique unital map from the base field.
    pub fn unit_map(a: &FiniteGradedAlgebra, field: &FiniteGradedAlgebra) -> Self {
        let m = Matrix::from_cols(&[a.unit().to_vec()], a.dim());
        Self { source: field.clone(), target: a.clone(), matrix: m }
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.matrix.mul_vec(v)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GradedAlgebraMorphism) -> Result<Self> {
        if self.target != other.source {
            return Err(Error::Structural("composition of non-composable morphisms".into()));
        }
        Ok(Self { source: self.source.clone(), target: other.target.clone(), matrix: other.matrix.mul(&self.matrix) })
    }

    pub fn is_injective(&self) -> bool {
        self.matrix.rank() == self.source.dim()
    }

    pub fn is_bijective(&self) -> bool {
        self.source.dim() == self.target.dim() && self.is_injective()
    }
}

/// Checks multiplicativity on basis pairs, unitality and degree preservation.
pub fn verify_morphism(phi: &GradedAlgebraMorphism) -> VerificationReport {
    let (a, b) = (&phi.source, &phi.target);
    let name = "verify_morphism";
    if a.group() != b.group() {
        return VerificationReport::fail(name, json!({"property": "grading_group"}));
    }
    for i in 0..a.dim() {
        let img = phi.apply(&a.basis_vec(i));
        if let Some(k) = (0..b.dim()).find(|&k| !img[k].is_zero() && b.degree(k) != a.degree(i)) {
            return VerificationReport::fail(name, json!({"property": "degree", "source": a.label(i), "target_component": b.label(k)}));
        }
    }
    if phi.apply(a.unit()) != b.unit() {
        return VerificationReport::fail(name, json!({"property": "unit"}));
    }
    let images: Vec<Vec<Q>> = (0..a.dim()).map(|i| phi.apply(&a.basis_vec(i))).collect();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let mut ab = vec![Q::zero(); a.dim()];
            for (k, c) in a.product(i, j) {
                ab[*k] = c.clone();
            }
            if phi.apply(&ab) != b.mul(&images[i], &images[j]) {
                return VerificationReport::fail(name, json!({"property": "multiplicative", "pair": [a.label(i), a.label(j)]}));
            }
        }
    }
    VerificationReport::pass(name).with_detail("injective", phi.is_injective()).with_detail("bijective", phi.is_bijective())
}

/// A morphism that is also bijective.
pub fn verify_isomorphism(phi: &GradedAlgebraMorphism) -> VerificationReport {
    let mut r = verify_morphism(phi);
    r.check = "verify_isomorphism".into();
    if r.is_pass() && !phi.is_bijective() {
        r.absorb(crate::report::Verdict::Fail, Some(json!({"property": "bijective"})));
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::algebra::HomogeneousElement;
    use crate::grading::builders::*;

    #[test]
    fn identity_and_corner_by_unit() {
        let m2 = build_matrix_algebra(2, None).unwrap();
        let c = corner_algebra(&m2, &HomogeneousElement::unit(&m2)).unwrap();
        let phi = GradedAlgebraMorphism::new(c.algebra, m2.clone(), Matrix::identity(4)).unwrap();
        assert!(verify_isomorphism(&phi).is_pass());
    }

    #[test]
    fn tensor_unit_inclusion() {
        let e2 = build_grassmann_truncated(2);
        let c = build_truncated_polynomial(2).unwrap();
        let t = tensor_with_commutative(&e2, &c).unwrap();
        let mut m = Matrix::zeros(8, 4);
        for i in 0..4 {
            for p in 0..2 {
                m.set(i * 2 + p, i, c.unit()[p].clone());
            }
        }
        let phi = GradedAlgebraMorphism::new(e2, t, m).unwrap();
        let r = verify_morphism(&phi);
        assert!(r.is_pass());
        assert!(phi.is_injective());
    }

    #[test]
    fn rejects_non_multiplicative() {
        let f2 = build_function_algebra(2);
        let swap_not_unital = Matrix::from_rows(vec![vec![Q::from_integer(1.into()), Q::zero()], vec![Q::zero(), Q::zero()]], 2);
        let phi = GradedAlgebraMorphism::new(f2.clone(), f2, swap_not_unital).unwrap();
        assert!(!verify_morphism(&phi).is_pass());
    }
}
