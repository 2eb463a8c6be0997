//! Noncommutative differential calculus on finite-dimensional algebras.

mod bimodule;
mod derivations;
mod filtration;
mod forms;

pub use bimodule::*;
pub use derivations::*;
pub use filtration::*;
pub use forms::*;
