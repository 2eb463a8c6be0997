//! Verification engine for finite-dimensional graded algebras, their
//! polynomial identities, and sheaves of such algebras on finite spaces.

pub mod calculus;
pub mod error;
pub mod grading;
pub mod identities;
pub mod io;
pub mod linalg;
pub mod morita;
pub mod par;
pub mod rational;
pub mod report;
pub mod sheaves;
pub mod suite;
pub mod univariate;

pub use error::{Error, Result};
pub use par::Exec;
pub use rational::Q;
pub use report::{Verdict, VerificationReport};
