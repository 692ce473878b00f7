//! Numerical laboratory for one-parameter semigroups of holomorphic self-maps
//! of the unit disc.

pub mod construct;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod func;
pub mod hypgeo;
pub mod quad;
pub mod semigroup;
pub mod spaces;
pub mod volterra;
pub mod xnum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
