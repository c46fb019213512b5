//! Thomas cluster process: Poisson parents, Poisson-many normally scattered
//! children per parent, children only.

use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::pattern::{wrap_coord, PointPattern};
use crate::rng::{replicate_rng, ReplicateRng};

use super::{poisson_count, push_uniform_point, Model, ModelConfig};

/// Draw order: parent count, parent coordinates point-major, then per parent
/// in draw order its child count and child displacements point-major.
pub(super) fn generate(config: &ModelConfig, rng: &mut ReplicateRng) -> Result<PointPattern> {
    let dim = config.dim;
    let volume = config.box_length.powi(dim as i32);
    // Children carry all the intensity, so parents arrive at γ/c̄.
    let parent_mean = config.target_intensity / config.mean_cluster_size * volume;
    let n_parents = poisson_count(rng, parent_mean);
    let mut parents = Vec::with_capacity(n_parents * dim);
    for _ in 0..n_parents {
        push_uniform_point(rng, dim, config.box_length, &mut parents);
    }
    let mut coords = Vec::new();
    for parent in parents.chunks_exact(dim) {
        let n_children = poisson_count(rng, config.mean_cluster_size);
        for _ in 0..n_children {
            for &c in parent {
                let z: f64 = StandardNormal.sample(rng);
                coords.push(wrap_coord(c + config.cluster_std * z, config.box_length));
            }
        }
    }
    PointPattern::new(dim, config.box_length, coords)
}

/// Thomas cluster sample with the config's cluster size and spread.
pub fn sim_thomas(config: &ModelConfig, seed: u64) -> Result<PointPattern> {
    let mut config = config.clone();
    config.model = Model::Thomas;
    config.validate()?;
    generate(&config, &mut replicate_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_count_matches_intensity() {
        let config = ModelConfig::new(Model::Thomas, 2, 10.0);
        let reps = 4000u64;
        let mut total = 0usize;
        for rep in 0..reps {
            total += super::super::simulate(&config, 31, rep).unwrap().len();
        }
        let avg = total as f64 / reps as f64;
        // Children per replicate have variance γV·(1 + c̄) for this cluster
        // law, so the band is wider than for Poisson counts.
        let mean = 100.0;
        let se = (mean * 11.0 / reps as f64).sqrt();
        assert!((avg - mean).abs() < 4.0 * se, "avg {avg} vs {mean}");
    }

    #[test]
    fn zero_spread_collapses_children_onto_parents() {
        let mut config = ModelConfig::new(Model::Thomas, 2, 20.0);
        config.cluster_std = 0.0;
        let p = sim_thomas(&config, 77).unwrap();
        assert!(!p.is_empty());
        let mut distinct: Vec<&[f64]> = Vec::new();
        for point in p.points() {
            if !distinct.contains(&point) {
                distinct.push(point);
            }
        }
        // Parents at intensity γ/10: far fewer distinct sites than children.
        assert!(distinct.len() < p.len());
        assert!(distinct.len() <= 400 / 10 + 30);
    }

    #[test]
    fn children_stay_in_box() {
        let config = ModelConfig::new(Model::Thomas, 3, 5.0);
        let p = sim_thomas(&config, 9).unwrap();
        for point in p.points() {
            for &c in point {
                assert!((0.0..5.0).contains(&c));
            }
        }
    }
}
