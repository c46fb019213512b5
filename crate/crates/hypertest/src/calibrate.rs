//! Monte-Carlo calibration of the null law of the test statistic, p-values
//! and critical values from the calibrated mixture, and the power harness.
//!
//! Under the hyperuniform null the statistic T is scale free, so one
//! calibration per wave grid serves every slope t. Its law is a mixture of
//! an atom at zero (the constrained and unconstrained maxima coincide) and a
//! gamma-distributed continuous part with rate close to 1/2 and a fractional
//! degree of freedom slightly below one.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{lr_statistic, FitResult, ATOM_THRESHOLD};
use crate::grid::build_wave_grid;
use crate::rng::replicate_rng;
use crate::simulate::{simulate, Model, ModelConfig};
use crate::special::regularized_gamma_upper;
use crate::spectral::{spectral_sample, SampleMeta, SpectralSample};

/// Wave-vector norm cutoff used for testing throughout.
pub const DEFAULT_CUTOFF: f64 = 0.75;
/// Replicates for a full null calibration.
pub const DEFAULT_CALIBRATION_REPS: usize = 100_000;
/// Replicates per power-table cell.
pub const DEFAULT_POWER_REPS: usize = 500;
/// Nominal significance level.
pub const DEFAULT_LEVEL: f64 = 0.05;

/// Where a calibration came from: the grid, the replicate count, the seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dim: usize,
    pub box_length: f64,
    pub cutoff: f64,
    /// Number of wave vectors in the calibrated grid.
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Calibrated null law of T: atom mass `p0` at zero plus a
/// Gamma(dof/2, 1/2) continuous part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullModel {
    /// Probability that T = 0 under the null.
    pub p0: f64,
    /// Fractional degree of freedom of the continuous part.
    pub dof: f64,
    /// Two-parameter moment-matched gamma shape of the positive part;
    /// diagnoses the fixed-rate assumption rather than feeding the test.
    pub diag_shape: f64,
    /// Companion rate; close to 1/2 when the conjectured form holds.
    pub diag_rate: f64,
    #[serde(flatten)]
    pub provenance: Provenance,
}

impl NullModel {
    /// Reference constants for the d=2, L=300, b=0.75 grid: atom 0.559,
    /// degree of freedom 0.944, implying a 5% critical value near 2.39.
    pub fn builtin() -> Self {
        let n = build_wave_grid(2, 300.0, DEFAULT_CUTOFF)
            .expect("reference grid is valid")
            .len();
        NullModel {
            p0: 0.559,
            dof: 0.944,
            diag_shape: 0.472,
            diag_rate: 0.5,
            provenance: Provenance {
                dim: 2,
                box_length: 300.0,
                cutoff: DEFAULT_CUTOFF,
                n,
                reps: DEFAULT_CALIBRATION_REPS,
                seed: 0,
            },
        }
    }

    /// Compact identifier echoed into test reports.
    pub fn id(&self) -> String {
        let p = &self.provenance;
        format!(
            "d{}-L{}-b{}-n{}-reps{}-seed{}",
            p.dim, p.box_length, p.cutoff, p.n, p.reps, p.seed
        )
    }

    fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::Config(format!(
                "null model atom mass must lie in (0, 1), got {}",
                self.p0
            )));
        }
        if !(self.dof.is_finite() && self.dof > 0.0) {
            return Err(Error::Config(format!(
                "null model degree of freedom must be positive, got {}",
                self.dof
            )));
        }
        Ok(())
    }
}

/// Null draws of T plus the count of replicates whose fit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDraws {
    /// Statistic values in replicate order, failed replicates skipped.
    pub ts: Vec<f64>,
    pub failures: usize,
}

/// Draws `reps` independent values of T under the null.
///
/// Replicate `i` draws `X_j` exponential with mean `kappas[j]` (slope one;
/// the law of T is the same for every slope) from stream `i` of `seed`, one
/// inverse-transform draw per entry in grid order, then runs the full fit.
/// Fit failures are counted and tolerated below 0.1%.
pub fn simulate_null_t(kappas: &[f64], reps: usize, seed: u64) -> Result<NullDraws> {
    if kappas.len() < 2 {
        return Err(Error::Config(format!(
            "null calibration needs at least 2 wave vectors, got {}",
            kappas.len()
        )));
    }
    if kappas.iter().any(|&k| !(k.is_finite() && k > 0.0)) {
        return Err(Error::Config("wave-vector norms must be positive and finite".into()));
    }
    if reps < 1000 {
        return Err(Error::Config(format!(
            "null calibration needs at least 1000 replicates, got {reps}"
        )));
    }
    let draws: Vec<Option<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(seed, rep as u64);
            let entries: Vec<(f64, f64)> = kappas
                .iter()
                .map(|&kappa| {
                    let u: f64 = rand::RngExt::random(&mut rng);
                    (kappa, -kappa * (1.0 - u).ln())
                })
                .collect();
            let sample = SpectralSample::new(entries, SampleMeta::unknown()).ok()?;
            lr_statistic(&sample).ok().map(|fit| fit.t_stat)
        })
        .collect();
    let failures = draws.iter().filter(|d| d.is_none()).count();
    if failures * 1000 >= reps {
        return Err(Error::Degenerate(format!(
            "null calibration: {failures} of {reps} replicates failed to fit"
        )));
    }
    Ok(NullDraws {
        ts: draws.into_iter().flatten().collect(),
        failures,
    })
}

/// Fits the atom + gamma mixture to null draws of T.
///
/// The atom mass is the fraction at zero; the degree of freedom matches the
/// mean of the positive part with the rate pinned at 1/2, so `dof` equals
/// that mean. A free two-parameter moment match of the positive part is
/// recorded as a diagnostic of the pinned rate.
pub fn fit_null_mixture(ts: &[f64], provenance: Provenance) -> Result<NullModel> {
    if ts.len() < 1000 {
        return Err(Error::Config(format!(
            "mixture fit needs at least 1000 draws, got {}",
            ts.len()
        )));
    }
    if ts.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
        return Err(Error::Config("statistic draws must be finite and nonnegative".into()));
    }
    let positive: Vec<f64> = ts.iter().copied().filter(|&t| t > ATOM_THRESHOLD).collect();
    let atoms = ts.len() - positive.len();
    if atoms == 0 {
        return Err(Error::Degenerate(
            "mixture fit: no atoms at zero; null draws should collapse often".into(),
        ));
    }
    if positive.len() < 100 {
        return Err(Error::Degenerate(format!(
            "mixture fit: only {} positive draws; need at least 100",
            positive.len()
        )));
    }
    let p0 = atoms as f64 / ts.len() as f64;
    let mean = positive.iter().sum::<f64>() / positive.len() as f64;
    let var = positive.iter().map(|&t| (t - mean) * (t - mean)).sum::<f64>()
        / (positive.len() - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::Degenerate("mixture fit: positive part has zero variance".into()));
    }
    let null = NullModel {
        p0,
        dof: mean,
        diag_shape: mean * mean / var,
        diag_rate: mean / var,
        provenance,
    };
    null.validate()?;
    Ok(null)
}

/// A calibration run: the fitted null plus replicate failure count.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub null: NullModel,
    pub failures: usize,
}

/// Builds the wave grid, draws the null statistics, and fits the mixture.
pub fn calibrate_null(
    dim: usize,
    box_length: f64,
    cutoff: f64,
    reps: usize,
    seed: u64,
) -> Result<Calibration> {
    let grid = build_wave_grid(dim, box_length, cutoff)?;
    let kappas = grid.kappas();
    let draws = simulate_null_t(&kappas, reps, seed)?;
    let null = fit_null_mixture(
        &draws.ts,
        Provenance {
            dim,
            box_length,
            cutoff,
            n: kappas.len(),
            reps,
            seed,
        },
    )?;
    Ok(Calibration { null, failures: draws.failures })
}

/// Null probability of exceeding `t_stat`: 1 on the atom, otherwise
/// `(1 - p0) * Q(dof/2, T/2)` with Q the regularized upper gamma.
pub fn p_value(t_stat: f64, null: &NullModel) -> Result<f64> {
    null.validate()?;
    if !(t_stat.is_finite() && t_stat >= 0.0) {
        return Err(Error::Config(format!(
            "statistic must be finite and nonnegative, got {t_stat}"
        )));
    }
    if t_stat <= ATOM_THRESHOLD {
        return Ok(1.0);
    }
    let tail = regularized_gamma_upper(null.dof / 2.0, t_stat / 2.0)?;
    Ok((1.0 - null.p0) * tail)
}

/// Tail probability of the continuous part alone, used to invert the
/// p-value below the atom plateau.
fn continuous_p(t_stat: f64, null: &NullModel) -> f64 {
    let tail = regularized_gamma_upper(null.dof / 2.0, t_stat / 2.0)
        .expect("validated null and positive statistic");
    (1.0 - null.p0) * tail
}

/// The statistic whose p-value equals `level`, by bisection to 1e-10.
///
/// Levels at or above the continuous mass `1 - p0` are unreachable: the
/// p-value jumps from 1 on the atom to `1 - p0` just off it.
pub fn critical_value(null: &NullModel, level: f64) -> Result<f64> {
    null.validate()?;
    if !(level > 0.0 && level < 1.0 - null.p0) {
        return Err(Error::Config(format!(
            "level {level} is unreachable: the null has atom mass {} so only \
             levels below {} resolve",
            null.p0,
            1.0 - null.p0
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while continuous_p(hi, null) >= level {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence { what: "critical value bracket", budget: 1000 });
        }
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if continuous_p(mid, null) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of testing one sample against a calibrated null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub t_stat: f64,
    pub p_value: f64,
    pub level: f64,
    /// True exactly when `p_value < level`.
    pub reject: bool,
    /// Identifier of the null model used.
    pub null_id: String,
}

/// Scores a fitted sample against the null at the given level.
pub fn test_report(fit: &FitResult, null: &NullModel, level: f64) -> Result<TestReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level must lie in (0, 1), got {level}")));
    }
    let p = p_value(fit.t_stat, null)?;
    Ok(TestReport {
        t_stat: fit.t_stat,
        p_value: p,
        level,
        reject: p < level,
        null_id: null.id(),
    })
}

/// Shared settings of a power study over thinned matching patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub dim: usize,
    /// Intensity of the Poisson partner process in the matching model.
    pub alpha: f64,
    pub cutoff: f64,
    pub level: f64,
    pub reps: usize,
    pub seed: u64,
}

/// Rejection rates over the (s, L) grid; `rates[i][j]` belongs to
/// `s_values[i]` and `box_lengths[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub s_values: Vec<f64>,
    pub box_lengths: Vec<f64>,
    pub rates: Vec<Vec<f64>>,
    /// Replicates that failed to simulate or fit, over all cells.
    pub failures: usize,
    pub reps: usize,
    pub level: f64,
    pub seed: u64,
}

/// Estimates test power on thinned matching patterns for every combination
/// of structure-factor offset `s` (thinning retention `1 - s`) and box
/// length. Each replicate simulates one pattern, runs the full pipeline,
/// and scores rejection at the configured level; cell `(i, j)` replicate
/// `r` uses stream `(i*cols + j) << 40 | r`, so results are independent of
/// scheduling and of which other cells run.
pub fn run_power(
    cfg: &PowerConfig,
    s_values: &[f64],
    box_lengths: &[f64],
    null: &NullModel,
) -> Result<PowerTable> {
    null.validate()?;
    if s_values.is_empty() || box_lengths.is_empty() {
        return Err(Error::Config("power study needs at least one s and one L".into()));
    }
    if s_values.iter().any(|&s| !(s.is_finite() && (0.0..1.0).contains(&s))) {
        return Err(Error::Config("offsets s must lie in [0, 1)".into()));
    }
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::Config(format!("level must lie in (0, 1), got {}", cfg.level)));
    }
    if cfg.reps == 0 || (cfg.reps as u64) >= (1u64 << 40) {
        return Err(Error::Config(format!("reps must lie in [1, 2^40), got {}", cfg.reps)));
    }
    let cols = box_lengths.len();
    let mut rates = vec![vec![0.0f64; cols]; s_values.len()];
    let mut failures = 0usize;
    for (i, &s) in s_values.iter().enumerate() {
        for (j, &length) in box_lengths.iter().enumerate() {
            let grid = build_wave_grid(cfg.dim, length, cfg.cutoff)?;
            let mut config = ModelConfig::new(Model::Matching, cfg.dim, length);
            config.alpha = cfg.alpha;
            config.thin = 1.0 - s;
            config.validate()?;
            let cell = (i * cols + j) as u64;
            let (rejects, cell_failures) = (0..cfg.reps)
                .into_par_iter()
                .map(|rep| {
                    let stream = (cell << 40) | rep as u64;
                    let verdict = simulate(&config, cfg.seed, stream)
                        .and_then(|pattern| spectral_sample(&pattern, &grid))
                        .and_then(|sample| lr_statistic(&sample))
                        .and_then(|fit| p_value(fit.t_stat, null));
                    match verdict {
                        Ok(p) => (usize::from(p < cfg.level), 0usize),
                        Err(_) => (0, 1),
                    }
                })
                .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            let successes = cfg.reps - cell_failures;
            if successes == 0 {
                return Err(Error::Degenerate(format!(
                    "power cell (s={s}, L={length}): every replicate failed"
                )));
            }
            rates[i][j] = rejects as f64 / successes as f64;
            failures += cell_failures;
        }
    }
    Ok(PowerTable {
        s_values: s_values.to_vec(),
        box_lengths: box_lengths.to_vec(),
        rates,
        failures,
        reps: cfg.reps,
        level: cfg.level,
        seed: cfg.seed,
    })
}

/// Writes a null model as pretty JSON, atomically (temp file then rename).
pub fn write_null_model<P: AsRef<Path>>(path: P, null: &NullModel) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = serde_json::to_vec_pretty(null)?;
    bytes.push(b'\n');
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, &bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a null model written by `write_null_model`, revalidating it.
pub fn read_null_model<P: AsRef<Path>>(path: P) -> Result<NullModel> {
    let bytes = fs::read(path)?;
    let null: NullModel = serde_json::from_slice(&bytes)?;
    null.validate()?;
    Ok(null)
}
