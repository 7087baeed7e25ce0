//! Certification of calm local minimax points for constrained minimax problems
//! `min_{x∈X} max_{y∈Y} f(x, y)`.

pub mod certify;
pub mod cones;
pub mod error;
pub mod expr;
pub mod kkt;
pub mod linalg;
pub mod num;
pub mod oracle;

pub use error::{Error, Result};
