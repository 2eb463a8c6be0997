//! Graded polynomials, multilinear identities, varieties and relatively
//! free algebras.

pub mod kernel;
pub mod pattern;
pub mod poly;
pub mod relfree;
pub mod variety;

pub use kernel::{grassmann_oracle, identity_kernel, GrassmannOracle, IdentityKernel, IdentitySource, KernelConfig, PreparedAlgebra};
pub use pattern::{multilinearize, patterns_of_degree, permutations, MultilinearPattern};
pub use poly::{evaluate, GradedPolynomial, GradedVariable, Word};
pub use relfree::{relatively_free_truncation, RelativelyFree};
pub use variety::{
    as_pattern_element, codimension_table, consequences_in_pattern, is_graded_identity, is_identity_in, same_identities, variety_contains,
    CodimensionRow,
};
