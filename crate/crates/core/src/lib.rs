//! Best L1 polynomial approximation on [-1, 1], exact recovery of polynomials
//! corrupted on small sets, and measurement of error localization.

pub mod catalog;
pub mod cheb;
pub mod error;
pub mod localization;
pub mod lp;
pub mod newton;
pub mod recovery;

pub use error::{L1Error, Result};
