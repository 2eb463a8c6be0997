//! Description files and text syntaxes.
//!
//! Every file format is JSON. Rationals are `"p/q"` strings, though plain
//! JSON integers are accepted on input. Algebra references are either a
//! builder name (`"M:2"`), a path to an algebra file, or an inline object.

mod files;
mod polynomial;

pub use files::*;
pub use polynomial::parse_polynomial;
