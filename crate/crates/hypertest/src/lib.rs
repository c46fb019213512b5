//! Likelihood-ratio testing for hyperuniformity of point patterns.
//!
//! The pipeline: simulate or load a point pattern on a torus, evaluate its
//! scattering intensities at the admissible reciprocal-lattice wave vectors,
//! fit the parabolic intensity model with and without the hyperuniformity
//! constraint, and compare the likelihood-ratio statistic against a
//! Monte-Carlo calibrated null mixture.

pub mod calibrate;
pub mod error;
pub mod fit;
pub mod grid;
pub mod pattern;
pub mod rng;
pub mod simulate;
pub mod special;
pub mod spectral;
mod util;
pub mod verify;

pub use calibrate::{
    calibrate_null, critical_value, fit_null_mixture, p_value, run_power, simulate_null_t,
    test_report, NullModel, PowerConfig, PowerTable, Provenance, TestReport,
};
pub use error::{Error, Result};
pub use fit::{lr_statistic, mle_full, mle_h0, FitResult, ATOM_THRESHOLD};
pub use grid::{build_wave_grid, WaveGrid, WaveVector};
pub use pattern::PointPattern;
pub use simulate::{simulate, simulate_with_stats, thin, Model, ModelConfig, SimStats};
pub use spectral::{scattering_intensity, spectral_sample, SampleMeta, SpectralSample};
