//! Statistical toolkit for multilook polarimetric SAR covariance data under
//! the scaled complex Wishart model.
//!
//! The crate provides, bottom up:
//!
//! - [`hermitian`]: dense complex Hermitian matrix algebra (Cholesky,
//!   log-determinants, inverses, Kronecker products);
//! - [`specfun`]: the special functions the model needs (log-gamma, digamma,
//!   trigamma, multivariate log-gamma, chi-square survival function);
//! - [`wishart`]: the scaled complex Wishart density, its gamma marginals,
//!   and a reproducible sampler with optional epsilon-contamination;
//! - [`estimation`]: maximum-likelihood estimation of the covariance and the
//!   equivalent number of looks, with Fisher information and Cramer-Rao
//!   bounds;
//! - [`distances`]: five closed-form stochastic distances between Wishart
//!   laws (Kullback-Leibler, chi-square, Renyi, Bhattacharyya, Hellinger)
//!   plus a scalar quadrature oracle for their shared (h, phi) form;
//! - [`hypothesis`]: the asymptotic chi-square homogeneity test built from
//!   any of the distances;
//! - [`experiments`]: Monte Carlo harnesses for empirical test size,
//!   contamination robustness, parameter sensitivity, and block pairing of
//!   real samples;
//! - [`dataio`]: the plain-text sample format and the experiment
//!   configuration format.

#![forbid(unsafe_code)]

pub mod dataio;
pub mod distances;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod hermitian;
pub mod hypothesis;
pub mod presets;
pub mod specfun;
pub mod wishart;

mod quad;
mod rng;

pub use error::{Error, Result};
pub use hermitian::{CholeskyFactor, HermitianMatrix};
