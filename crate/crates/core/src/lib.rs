// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod branch;
pub mod circle;
pub mod cli;
pub mod config;
pub mod constants;
pub mod error;
pub mod euclidean;
pub mod geometry;
pub mod identities;
pub mod newton;
pub mod sphere;

pub use error::{Error, Result};
