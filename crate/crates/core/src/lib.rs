//! Bayesian time-varying-parameter exchange-rate forecasting.
//!
//! The pipeline: ingest quarterly macro panels ([`dataio`]), build
//! exchange-rate fundamentals ([`fundamentals`]), estimate random-walk
//! time-varying-parameter regressions by Gibbs sampling
//! ([`statespace`], [`gibbs`]), generate direct multi-step out-of-sample
//! forecasts under recursive or rolling schemes ([`forecasting`]), and
//! score them against a driftless random walk ([`evaluation`]).

pub mod dataio;
pub mod error;
pub mod evaluation;
pub mod forecasting;
pub mod fundamentals;
pub mod gibbs;
pub mod linalg;
pub mod regress;
pub mod seeding;
pub mod statespace;

pub use error::{Error, ErrorClass, Result};
