//! Bound states of an atom with a magnetic quadrupole moment in a rotating
//! frame, subject to a Landau-type effective field and a `ϑ/ρ` scalar
//! potential.
//!
//! The radial problem is quasi-exactly solvable: polynomial states exist only
//! for discrete cyclotron frequencies. This crate computes those frequencies
//! and energies for any `(n, l)`, evaluates the radial wavefunctions and
//! checks every analytic level against an independent finite-difference
//! eigensolver.
//!
//! - [`model`]: physical parameters and derived scales (`ω`, `δ`, `Θ`, `ξ`).
//! - [`heun`]: the truncated biconfluent Heun series and `F(r)`.
//! - [`quantize`]: truncation conditions, roots, frequencies and energies.
//! - [`oracle`]: finite-difference spectrum and mode verification.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod heun;
pub mod model;
pub mod oracle;
pub mod quantize;

pub use error::{Error, Result};
pub use heun::{RadialSamples, SeriesCoefficients};
pub use model::{DerivedScales, PhysicalParams};
pub use oracle::{GridSpec, VerificationReport, VerifyOptions};
pub use quantize::{Branch, ClosedForm, ConstraintPolynomial, QuantizedMode};
