//! Error type shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// Variants split into two families, mirrored by the CLI exit codes:
/// usage/input problems (bad flags, malformed files, invalid configuration)
/// and numerical/stochastic failures (non-convergence, saturation,
/// degenerate samples).
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or argument combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The admissible wave-vector set below the cutoff is empty.
    #[error(
        "empty wave grid: cutoff {cutoff} admits no nonzero reciprocal-lattice \
         vector (need cutoff > 2*pi/L = {min_cutoff:.6})"
    )]
    EmptyGrid { cutoff: f64, min_cutoff: f64 },

    /// A spectral operation was asked to divide by a zero point count.
    #[error("point pattern is empty; scattering intensity is undefined")]
    EmptyPattern,

    /// An intensity observation violates the positivity the model demands.
    #[error(
        "non-positive intensity observation x[{index}] = {value}; exponential \
         observations are almost surely positive, so zeros signal degenerate input"
    )]
    NonPositiveSample { index: usize, value: f64 },

    /// A parameter pair lies outside the admissible cone.
    #[error("parameter (s, t) = ({s}, {t}) lies outside the admissible cone")]
    OutsideCone { s: f64, t: f64 },

    /// An iterative routine exhausted its budget.
    #[error("{what} failed to converge within {budget} iterations")]
    NoConvergence { what: &'static str, budget: usize },

    /// Sequential packing could not reach the requested count.
    #[error(
        "saturation failure: placed {placed} of {target} points within the \
         attempt budget ({attempts} attempts, {resamples} pattern resamples)"
    )]
    Saturation {
        placed: usize,
        target: usize,
        attempts: u64,
        resamples: u32,
    },

    /// A sample or statistic is too degenerate to process.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code for this error: 1 for usage/input problems, 2 for
    /// numerical or stochastic failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 1,
            Error::EmptyGrid { .. }
            | Error::EmptyPattern
            | Error::NonPositiveSample { .. }
            | Error::OutsideCone { .. }
            | Error::NoConvergence { .. }
            | Error::Saturation { .. }
            | Error::Degenerate(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
