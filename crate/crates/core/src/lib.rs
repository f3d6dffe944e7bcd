//! Causal graphs over the value dimensions of language models.
//!
//! The crate turns questionnaire responses gathered under different steering
//! conditions (role prompts, SAE feature amplification, explicit value
//! instructions) into exact orientation matrices, mines a causal graph with the
//! Peter-Clark algorithm, and measures how well a graph predicts the side
//! effects of steering one value on the others.
//!
//! Statistical code is generic over the floating scalar (`f32`/`f64`) through
//! [`Scalar`]; orientation scores and steering rates are exact rationals.

pub mod causal;
pub mod datamodel;
pub mod harness;
pub mod metrics;
pub mod scalar;
pub mod scoring;
mod seed;
pub mod synthlab;

pub use scalar::Scalar;

/// Exact rate used for every steering statistic.
pub type Rate = num_rational::BigRational;

/// Numeric view of an orientation matrix in double precision.
pub type NumericMatrix64 = causal::NumericMatrix<f64>;
/// Numeric view of an orientation matrix in single precision.
pub type NumericMatrix32 = causal::NumericMatrix<f32>;

/// Linear SCM with double-precision weights.
pub type ScmSpec64 = synthlab::ScmSpec<f64>;
/// Linear SCM with single-precision weights.
pub type ScmSpec32 = synthlab::ScmSpec<f32>;
