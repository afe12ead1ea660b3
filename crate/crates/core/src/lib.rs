//! Mixed isogeometric discretizations of planar linear elasticity.

// Index loops mirror the tensor notation; `!(x > 0.0)` rejects NaN on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bspline;
pub mod derham;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod projection;
pub mod quadrature;
pub mod solve;
pub mod strongsym;
pub mod weaksym;

pub use error::{Error, Result};
