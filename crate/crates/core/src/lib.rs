//! Numerical laboratory for the monotonicity inequality
//! `tr(|a-b|^p) <= tr((a-b)(a^{p-1} - b^{p-1}))` on positive matrices, `p >= 2`,
//! and the machinery around it: fractional powers through integral and
//! contour representations, Fréchet derivatives of the power map,
//! conditional expectations, and resolvents of positive semigroups.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expectations;
pub mod funcalc;
pub mod lab;
pub mod matcore;
pub mod semigroups;

pub use error::{Error, Result};
pub use matcore::{CMat, HermitianMatrix, PositiveMatrix, Spectrum, WeightedAtoms, C64};
