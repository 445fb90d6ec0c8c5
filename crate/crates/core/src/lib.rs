//! Moving block bootstrap of the empirical process for long-range dependent
//! subordinated Gaussian series.
//!
//! The pipeline: a [`lrd_gauss::CovarianceModel`] generates exact Gaussian
//! paths `X`, a [`hermite::Transform`] maps them to observations `Y = G(X)`,
//! [`empirical`] evaluates the normalised empirical process and its reduction
//! residual, [`mbb`] resamples blocks, and [`estimator`] recovers `|J_m|`
//! from bootstrap replicates. [`experiment`] drives Monte Carlo scenarios and
//! writes reports.

pub mod diagnostics;
pub mod empirical;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod hermite;
pub mod lrd_gauss;
pub mod mbb;
pub mod quadrature;
pub mod rng;
pub mod sample;

pub use error::{ConfigError, Error, Result};
pub use sample::SubordinatedSample;
