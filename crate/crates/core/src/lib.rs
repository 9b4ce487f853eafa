//! Fisher information for estimating an unknown unitary `U` applied to one half
//! of an entangled probe.
//!
//! The probe `Σ R_kl |k>|l>` is sent through `U ⊗ 1` and the joint output is
//! measured. This crate computes the quantum Fisher information `H` of the
//! output family, the classical Fisher information `I` of a measurement, and
//! the figure of merit `tr H^{-1} I`. It also builds entangled and separable
//! measurement families and runs maximum-likelihood simulations.
//!
//! Modules:
//! - [`su_algebra`]: su(d) generators, exponential and SU(2) polar charts.
//! - [`channel_model`]: probe states, output kets and their derivatives.
//! - [`fisher`]: QFI, SLDs, classical FI, merit, QCRB and achievability.
//! - [`povm`]: measurement families, refinement, optimal construction, files.
//! - [`estimate`]: sampling, MLE, covariance studies, searches.
//! - [`verify`]: the closed-form check suite behind `unitary-fisher verify`.
//! - [`cli`]: the `unitary-fisher` command line.

pub mod channel_model;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod fisher;
pub mod linalg;
pub mod povm;
pub mod serialize;
pub mod su_algebra;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
