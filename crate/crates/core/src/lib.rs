#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlators;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod geometry;
pub mod quadrature;
pub mod smearing;
pub mod specfun;

pub use error::{Error, Result};
