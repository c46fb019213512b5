//! Seeded generators for benchmark point processes on the torus, plus
//! independent thinning.
//!
//! Every generator is a pure function of `(config, seed, replicate)`: the
//! replicate index selects an independent counter-based stream, so batches
//! give identical results regardless of worker scheduling. Draw order within
//! a replicate is fixed and documented per generator.

mod matching;
mod poisson;
mod rsa;
mod thomas;
mod url;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::PointPattern;
use crate::rng::{replicate_rng, ReplicateRng};

pub use matching::sim_matching;
pub use poisson::sim_poisson;
pub use rsa::sim_rsa;
pub use thomas::sim_thomas;
pub use url::sim_url;

/// The five benchmark point processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Stationary Poisson process.
    Poisson,
    /// Thomas cluster process: Poisson parents, normally scattered children.
    Thomas,
    /// Random sequential adsorption of hard spheres at fixed count.
    Rsa,
    /// Uniformly randomized (stationarized) lattice.
    Url,
    /// Matched Poisson points of a lattice-to-Poisson stable matching.
    Matching,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Poisson => "poisson",
            Model::Thomas => "thomas",
            Model::Rsa => "rsa",
            Model::Url => "url",
            Model::Matching => "matching",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" => Ok(Model::Poisson),
            "thomas" => Ok(Model::Thomas),
            "rsa" => Ok(Model::Rsa),
            "url" => Ok(Model::Url),
            "matching" => Ok(Model::Matching),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected poisson|thomas|rsa|url|matching)"
            ))),
        }
    }
}

/// Full description of one simulation target. Fields irrelevant to the
/// chosen model keep their defaults and are ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: Model,
    pub dim: usize,
    pub box_length: f64,
    /// Expected points per unit volume; all models target this on average.
    pub target_intensity: f64,
    /// Thomas: mean children per cluster.
    pub mean_cluster_size: f64,
    /// Thomas: standard deviation of the isotropic child displacement.
    pub cluster_std: f64,
    /// RSA: number of spheres to place; default rounds `γ·L^d`.
    pub rsa_count: Option<usize>,
    /// RSA: target volume fraction; default 0.747/0.547/0.384 for d=1/2/3.
    pub volume_fraction: Option<f64>,
    /// RSA: attempt budget per pattern is this factor times the count.
    pub rsa_attempt_factor: u64,
    /// Matching: intensity of the Poisson partner process, must exceed 1.
    pub alpha: f64,
    /// Retention probability of the final independent thinning; 1 disables.
    pub thin: f64,
}

impl ModelConfig {
    pub fn new(model: Model, dim: usize, box_length: f64) -> Self {
        Self {
            model,
            dim,
            box_length,
            target_intensity: 1.0,
            mean_cluster_size: 10.0,
            cluster_std: 1.0,
            rsa_count: None,
            volume_fraction: None,
            rsa_attempt_factor: 10_000,
            alpha: 3.0,
            thin: 1.0,
        }
    }

    /// Saturation-adjacent volume fractions used when none is given.
    pub fn default_volume_fraction(dim: usize) -> Result<f64> {
        match dim {
            1 => Ok(0.747),
            2 => Ok(0.547),
            3 => Ok(0.384),
            d => Err(Error::Config(format!("no default volume fraction for dim {d}"))),
        }
    }

    /// Volume of the unit d-ball times `2^d/...`: the constant `κ_d` with
    /// sphere volume `κ_d·R^d`, for d up to 3.
    pub(crate) fn ball_volume_factor(dim: usize) -> Result<f64> {
        match dim {
            1 => Ok(2.0),
            2 => Ok(std::f64::consts::PI),
            3 => Ok(4.0 * std::f64::consts::PI / 3.0),
            d => Err(Error::Config(format!("hard spheres unsupported for dim {d}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Config(format!("dim must be 1, 2, or 3, got {}", self.dim)));
        }
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            return Err(Error::Config(format!(
                "box_length must be positive and finite, got {}",
                self.box_length
            )));
        }
        if !(self.target_intensity.is_finite() && self.target_intensity >= 0.0) {
            return Err(Error::Config(format!(
                "target_intensity must be nonnegative, got {}",
                self.target_intensity
            )));
        }
        if !(self.thin > 0.0 && self.thin <= 1.0) {
            return Err(Error::Config(format!(
                "thinning retention must lie in (0, 1], got {}",
                self.thin
            )));
        }
        match self.model {
            Model::Thomas => {
                if !(self.mean_cluster_size.is_finite() && self.mean_cluster_size > 0.0) {
                    return Err(Error::Config(format!(
                        "mean_cluster_size must be positive, got {}",
                        self.mean_cluster_size
                    )));
                }
                if !(self.cluster_std.is_finite() && self.cluster_std >= 0.0) {
                    return Err(Error::Config(format!(
                        "cluster_std must be nonnegative, got {}",
                        self.cluster_std
                    )));
                }
            }
            Model::Rsa => {
                Self::ball_volume_factor(self.dim)?;
                if let Some(phi) = self.volume_fraction {
                    if !(phi > 0.0 && phi < 1.0) {
                        return Err(Error::Config(format!(
                            "volume fraction must lie in (0, 1), got {phi}"
                        )));
                    }
                }
                if self.rsa_attempt_factor == 0 {
                    return Err(Error::Config("rsa_attempt_factor must be positive".into()));
                }
            }
            Model::Url | Model::Matching => {
                if self.box_length.fract() != 0.0 {
                    return Err(Error::Config(format!(
                        "model '{}' needs an integer box_length, got {}",
                        self.model.name(),
                        self.box_length
                    )));
                }
                if self.model == Model::Matching && !(self.alpha > 1.0) {
                    return Err(Error::Config(format!(
                        "matching intensity alpha must exceed 1, got {}",
                        self.alpha
                    )));
                }
            }
            Model::Poisson => {}
        }
        Ok(())
    }
}

/// Counters surfaced alongside a simulated pattern.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimStats {
    /// Whole-pattern resamples forced by saturation or degenerate draws.
    pub resamples: u32,
}

/// Simulates one replicate and reports resample counters.
pub fn simulate_with_stats(
    config: &ModelConfig,
    seed: u64,
    replicate: u64,
) -> Result<(PointPattern, SimStats)> {
    config.validate()?;
    let mut rng = replicate_rng(seed, replicate);
    let mut stats = SimStats::default();
    let pattern = match config.model {
        Model::Poisson => poisson::generate(config, &mut rng)?,
        Model::Thomas => thomas::generate(config, &mut rng)?,
        Model::Rsa => rsa::generate(config, &mut rng, &mut stats)?,
        Model::Url => url::generate(config, &mut rng)?,
        Model::Matching => matching::generate(config, &mut rng, &mut stats)?,
    };
    let pattern = if config.thin < 1.0 {
        thin_with(&pattern, config.thin, &mut rng)?
    } else {
        pattern
    };
    Ok((pattern, stats))
}

/// Simulates one replicate of the configured model: replicate `i` under
/// `seed` always yields the same pattern, independent of scheduling.
pub fn simulate(config: &ModelConfig, seed: u64, replicate: u64) -> Result<PointPattern> {
    simulate_with_stats(config, seed, replicate).map(|(p, _)| p)
}

/// Independent thinning: keeps each point with probability `p`, using one
/// Bernoulli draw per point in storage order.
pub fn thin(pattern: &PointPattern, p: f64, seed: u64) -> Result<PointPattern> {
    let mut rng = replicate_rng(seed, 0);
    thin_with(pattern, p, &mut rng)
}

pub(crate) fn thin_with(
    pattern: &PointPattern,
    p: f64,
    rng: &mut ReplicateRng,
) -> Result<PointPattern> {
    use rand::RngExt;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("retention probability must lie in (0, 1], got {p}")));
    }
    let dim = pattern.dim();
    let mut coords = Vec::new();
    for point in pattern.points() {
        let u: f64 = rng.random();
        if u < p {
            coords.extend_from_slice(point);
        }
    }
    PointPattern::new(dim, pattern.box_length(), coords)
}

/// Exact Poisson count; zero mean short-circuits to zero.
pub(crate) fn poisson_count(rng: &mut ReplicateRng, mean: f64) -> usize {
    use rand_distr::{Distribution, Poisson};
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    let draw: f64 = dist.sample(rng);
    draw.round() as usize
}

/// Uniform coordinates on `[0, L)^d` appended point-major.
pub(crate) fn push_uniform_point(
    rng: &mut ReplicateRng,
    dim: usize,
    box_length: f64,
    coords: &mut Vec<f64>,
) {
    use rand::RngExt;
    for _ in 0..dim {
        coords.push(rng.random_range(0.0..box_length));
    }
}
