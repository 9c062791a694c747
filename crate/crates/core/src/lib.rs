//! Localization of an anomalous large-mean submatrix of unknown size.
//!
//! The estimator maximizes the multiscale scan objective
//!
//! ```text
//! sum(X[I, J]) / sqrt(|I| |J|) - lambda(|I|, |J|),
//! lambda(m, n) = sqrt((2 + delta) * ln[M N C(M, m) C(N, n)])
//! ```
//!
//! over all nonempty row sets `I` and column sets `J`. Exact maximization is
//! exponential, so [`scanners`] provides two approximate searches (adaptive LAS
//! and golden-section search over sizes) plus an exhaustive oracle for small
//! matrices. [`baselines`] holds the spectral and greatest-marginal-gap
//! comparators, [`generators`] the planted-block simulators and [`bench`] the
//! experiment drivers.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod generators;
pub mod matrix;
pub mod objective;
pub mod rng;
pub mod scanners;
pub mod thresholds;

pub use error::{Error, Result};
pub use generators::{generate, Family, GenerationSpec};
pub use matrix::{DataMatrix, Selection};
pub use objective::{
    err_measure, mscan_objective, penalty, penalty_approx, submatrix_sum, PenaltyParams,
};
pub use scanners::ScanResult;
pub use thresholds::{constant_c, theta0, theta1, theta_crit, Thresholds};
