//! Isoprobability classes of two-level drive pairs: pulse-shape catalog,
//! numeric propagation, analytic oracles, excitation landscapes and map
//! registration.

// Guards of the form `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod analytic;
pub mod catalog;
pub mod dynamics;
mod error;
pub mod landscape;

pub use error::{Error, Result};
