//! Presheaves and sheaves of graded algebras on finite spaces.

mod cech;
mod presheaf;
mod pushforward;
mod random;
mod recovering;
mod sheaf;
mod topology;

pub use cech::*;
pub use presheaf::*;
pub use pushforward::*;
pub use random::*;
pub use recovering::*;
pub use sheaf::*;
pub use topology::*;
