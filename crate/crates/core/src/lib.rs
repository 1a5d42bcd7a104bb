#![cfg_attr(not(any(feature = "std", test)), no_std)]
// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod criteria;
pub mod error;
pub mod functions;
pub mod gauss_kronrod;
pub mod geometry;
pub(crate) mod math;
pub mod operators;
pub mod quadrature;
pub mod truncation;
pub mod weights;

pub use error::{Error, Result};
