//! Uniformly randomized lattice: one uniform point per unit cell of the
//! integer lattice, plus a global uniform shift, wrapped onto the torus.
//!
//! The pattern has exactly `L^d` points and is hyperuniform with a parabolic
//! structure factor of slope `1/12` at small wave numbers.

use crate::error::Result;
use crate::pattern::PointPattern;
use crate::rng::{replicate_rng, ReplicateRng};
use rand::RngExt;

use super::{Model, ModelConfig};

/// Draw order: global shift first (one uniform per axis), then per-cell
/// displacements in lexicographic cell order, point-major.
pub(super) fn generate(config: &ModelConfig, rng: &mut ReplicateRng) -> Result<PointPattern> {
    let dim = config.dim;
    let length = config.box_length;
    let cells = length as usize;
    let mut shift = [0.0f64; 3];
    for s in shift.iter_mut().take(dim) {
        *s = rng.random::<f64>();
    }
    let count = cells.pow(dim as u32);
    let mut coords = Vec::with_capacity(count * dim);
    let mut corner = [0usize; 3];
    for flat in 0..count {
        let mut rem = flat;
        for a in (0..dim).rev() {
            corner[a] = rem % cells;
            rem /= cells;
        }
        for a in 0..dim {
            let c = corner[a] as f64 + rng.random::<f64>() + shift[a];
            coords.push(c.rem_euclid(length));
        }
    }
    PointPattern::new(dim, length, coords)
}

/// Randomized-lattice sample with exactly `L^d` points.
pub fn sim_url(config: &ModelConfig, seed: u64) -> Result<PointPattern> {
    let mut config = config.clone();
    config.model = Model::Url;
    config.validate()?;
    generate(&config, &mut replicate_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_is_cells_to_the_dim() {
        for (dim, length, want) in [(1usize, 12.0, 12usize), (2, 7.0, 49), (3, 4.0, 64)] {
            let config = ModelConfig::new(Model::Url, dim, length);
            let p = sim_url(&config, 5).unwrap();
            assert_eq!(p.len(), want);
        }
    }

    #[test]
    fn non_integer_length_is_rejected() {
        let config = ModelConfig::new(Model::Url, 2, 7.5);
        assert!(sim_url(&config, 0).is_err());
    }

    #[test]
    fn each_unit_cell_holds_one_point_after_unshifting() {
        // Replaying the stream recovers the global shift, and removing it must
        // leave exactly one point in every unit cell.
        let config = ModelConfig::new(Model::Url, 2, 6.0);
        let p = sim_url(&config, 9).unwrap();
        let mut replay = replicate_rng(9, 0);
        let shift = [replay.random::<f64>(), replay.random::<f64>()];
        let mut seen = vec![false; 36];
        for point in p.points() {
            let mut idx = 0usize;
            for a in 0..2 {
                let unshifted = (point[a] - shift[a]).rem_euclid(6.0);
                let cell = (unshifted.floor() as usize).min(5);
                idx = idx * 6 + cell;
            }
            assert!(!seen[idx], "cell {idx} occupied twice");
            seen[idx] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn replicates_replay_and_differ() {
        let config = ModelConfig::new(Model::Url, 1, 20.0);
        let a = sim_url(&config, 3).unwrap();
        let b = sim_url(&config, 3).unwrap();
        assert_eq!(a.coords(), b.coords());
        let c = generate(&config, &mut replicate_rng(3, 1)).unwrap();
        assert_ne!(a.coords(), c.coords());
    }
}
