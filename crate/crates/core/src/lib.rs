//! Diffusion-based kernel density estimation.
//!
//! The crate provides the improved Sheather–Jones (ISJ) plug-in selector,
//! Gaussian and theta-kernel estimators computed spectrally, an adaptive
//! estimator defined by a linear diffusion equation, a two-dimensional
//! variant with masked domains, classical comparators and a benchmarking
//! testbed.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparators;
pub mod diffusion;
pub mod error;
pub mod gauss;
pub mod grid;
pub mod isj;
pub mod kde1d;
pub mod kde2d;
pub mod spectral;
pub mod testbed;

pub use error::{KdeError, Result};
