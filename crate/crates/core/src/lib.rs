//! Maximal surfaces in Lorentz-Minkowski 3-space given implicitly by
//! `zeta(z) = phi(x) psi(y)`, with each factor solving a first-order equation
//! whose right-hand side is a quadratic in the square of the function.

// `!(x > 0.0)` is used on purpose so that NaN is rejected with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod error;
pub mod families;
pub mod genmat;
pub mod profiles;
pub mod singular;
pub mod surface;

pub use error::{Error, Result};
