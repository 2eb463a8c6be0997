//! Finite-dimensional graded algebras, their builders and morphisms.

pub mod algebra;
pub mod builders;
pub mod group;
pub mod morphism;
pub mod structure;

pub use algebra::{element_from_terms, validate_algebra, FiniteGradedAlgebra, HomogeneousElement};
pub use builders::*;
pub use group::{GradingGroup, GroupElem};
pub use morphism::{verify_isomorphism, verify_morphism, GradedAlgebraMorphism};
pub use structure::{
    center, center_radical_local, commutator_space, ideal_closure, product_space, quotient_algebra, radical, subalgebra, LocalityReport,
    Quotient,
};
