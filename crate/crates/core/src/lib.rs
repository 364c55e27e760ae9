// `!(x > 0.0)` is used on purpose so NaN fails every validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod error;
pub mod harness;
pub mod modcont;
mod parallel;
pub mod quad;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
