//! Optimal matching for Jacobi (beta) models on `[-1, 1]` under the intrinsic
//! metric `ρ(x, y) = |arccos x − arccos y|`.
//!
//! The crate is split along the lines of the computation:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`distributions`] | Jacobi measures: density, CDF, quantile, sampling, intrinsic distances |
//! | [`spectral`] | eigenvalues, orthonormal Jacobi polynomials, heat kernel, trace formula, limiting constants |
//! | [`transport`] | exact `W₂²` by monotone rearrangement and by linear assignment |
//! | [`experiments`] | seeded Monte Carlo harness, constant estimation, log-rate fits |
//! | [`quadrature`] | Gauss–Jacobi and Gauss–Legendre rules |
//!
//! ```
//! use jacobi_match::{distributions::JacobiParams, spectral::spectral_constant};
//!
//! let uniform = JacobiParams::symmetric(2.0).unwrap();
//! assert!((uniform.pdf(0.3).unwrap() - 0.5).abs() < 1e-15);
//! assert!((spectral_constant(3.0, 1e-14).unwrap() - 0.75).abs() < 1e-12);
//! ```

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod experiments;
pub mod quadrature;
pub mod rng;
pub mod selftest;
pub mod special;
pub mod spectral;
pub mod transport;

pub use distributions::{EmpiricalSample, JacobiParams, Model, ProductJacobiParams};
pub use error::{Error, Result};
pub use rng::RngState;
