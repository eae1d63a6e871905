// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod error;
pub mod estimates;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod harness;
pub mod manifold;
pub mod picard;
pub mod quadrature;
pub mod report;
pub mod spacetime;

pub use error::{Error, Result};
