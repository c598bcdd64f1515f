//! Inverse and direct scattering for CMV operators.
//!
//! A scattering function `R` on the unit circle determines a weighted space
//! `L^R` whose defect vectors produce Verblunsky coefficients `α_j`. The
//! coefficients define a two-sided CMV matrix, and resolvents of that matrix
//! reconstruct `R`.

// Negated comparisons are deliberate: NaN must fail the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod check;
pub mod circle;
pub mod cmv;
pub mod config;
pub mod error;
pub mod families;
pub mod io;
pub mod lr;
pub mod oracle;
pub mod scattering;
pub mod spectral;
pub mod verblunsky;

pub use num_complex::Complex64;

/// Complex scalar used throughout.
pub type C64 = Complex64;

#[inline]
pub(crate) fn c0() -> C64 {
    C64::new(0.0, 0.0)
}

pub use error::{Error, Result};
