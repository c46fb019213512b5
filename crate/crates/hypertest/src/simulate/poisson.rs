//! Stationary Poisson process on the torus.

use crate::error::Result;
use crate::pattern::PointPattern;
use crate::rng::{replicate_rng, ReplicateRng};

use super::{poisson_count, push_uniform_point, Model, ModelConfig};

/// Draw order: point count, then coordinates point-major.
pub(super) fn generate(config: &ModelConfig, rng: &mut ReplicateRng) -> Result<PointPattern> {
    let mean = config.target_intensity * config.box_length.powi(config.dim as i32);
    let count = poisson_count(rng, mean);
    let mut coords = Vec::with_capacity(count * config.dim);
    for _ in 0..count {
        push_uniform_point(rng, config.dim, config.box_length, &mut coords);
    }
    PointPattern::new(config.dim, config.box_length, coords)
}

/// Poisson sample with the config's intensity in the config's box.
pub fn sim_poisson(config: &ModelConfig, seed: u64) -> Result<PointPattern> {
    let mut config = config.clone();
    config.model = Model::Poisson;
    config.validate()?;
    generate(&config, &mut replicate_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_count_matches_intensity() {
        let config = ModelConfig::new(Model::Poisson, 2, 10.0);
        let mean = 100.0;
        let reps = 4000u64;
        let mut total = 0usize;
        for rep in 0..reps {
            total += super::super::simulate(&config, 17, rep).unwrap().len();
        }
        let avg = total as f64 / reps as f64;
        let se = (mean / reps as f64).sqrt();
        assert!((avg - mean).abs() < 4.0 * se, "avg {avg} vs {mean}");
    }

    #[test]
    fn zero_intensity_gives_empty_pattern() {
        let mut config = ModelConfig::new(Model::Poisson, 2, 10.0);
        config.target_intensity = 0.0;
        let p = sim_poisson(&config, 5).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn count_variance_is_poisson_like() {
        let config = ModelConfig::new(Model::Poisson, 1, 50.0);
        let reps = 4000u64;
        let counts: Vec<f64> = (0..reps)
            .map(|rep| super::super::simulate(&config, 23, rep).unwrap().len() as f64)
            .collect();
        let mean: f64 = counts.iter().sum::<f64>() / reps as f64;
        let var: f64 =
            counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (reps - 1) as f64;
        // Poisson: variance equals the mean; the 4-sigma band uses
        // Var(sample var) ≈ 2·mean²/reps for large means.
        let se = (2.0 * 50.0f64 * 50.0 / reps as f64).sqrt();
        assert!((var - 50.0).abs() < 4.0 * se + 4.0, "var {var}");
    }

    #[test]
    fn wrapper_forces_model() {
        let config = ModelConfig::new(Model::Thomas, 2, 8.0);
        let p = sim_poisson(&config, 1).unwrap();
        assert_eq!(p.dim(), 2);
    }
}
