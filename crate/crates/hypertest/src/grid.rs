//! Admissible reciprocal-lattice wave vectors below a norm cutoff.
//!
//! The periodic box `[0, L)^d` admits the wave vectors `k = 2π n / L` with
//! integer `n ≠ 0`. Scattering intensities are only unbiased estimates of the
//! structure factor at exactly these vectors, so off-grid vectors are not
//! representable here at all. One representative per antipodal pair `{k, -k}`
//! is kept (intensities at `k` and `-k` coincide), selected by the sign of
//! the first nonzero index entry.

use crate::error::{Error, Result};

/// One admissible wave vector `k = 2π n / L`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveVector {
    /// Integer index tuple `n`, not all zero, first nonzero entry positive.
    pub index: Vec<i64>,
    /// Components `k_j = 2π n_j / L` (inverse length).
    pub components: Vec<f64>,
    /// Squared norm `‖k‖²` (inverse length squared).
    pub kappa: f64,
}

/// All admissible wave vectors with `‖k‖ < cutoff`, lexicographically ordered
/// by index tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveGrid {
    pub dim: usize,
    pub box_length: f64,
    pub cutoff: f64,
    pub vectors: Vec<WaveVector>,
}

impl WaveGrid {
    /// Number of wave vectors.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Squared norms `κ_j` in grid order.
    pub fn kappas(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v.kappa).collect()
    }

    /// Largest absolute index entry over all vectors and axes (0 for an
    /// empty grid). Bounds the power tables used by batch transforms.
    pub fn max_index(&self) -> i64 {
        self.vectors
            .iter()
            .flat_map(|v| v.index.iter().map(|n| n.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Enumerates the admissible wave vectors for a `d`-dimensional box of side
/// `box_length` below the norm `cutoff`.
///
/// Included are exactly the integer tuples `n ≠ 0` with `‖2π n / L‖ < cutoff`
/// (strict) whose first nonzero entry is positive, sorted lexicographically.
/// The construction is a pure function: identical inputs give bit-identical
/// output.
///
/// Errors when no vector qualifies (`cutoff ≤ 2π / L`).
pub fn build_wave_grid(dim: usize, box_length: f64, cutoff: f64) -> Result<WaveGrid> {
    if dim == 0 {
        return Err(Error::Config("grid dimension must be >= 1".into()));
    }
    if !(box_length.is_finite() && box_length > 0.0) {
        return Err(Error::Config(format!(
            "box length must be positive and finite, got {box_length}"
        )));
    }
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::Config(format!(
            "cutoff must be positive and finite, got {cutoff}"
        )));
    }

    let step = 2.0 * std::f64::consts::PI / box_length;
    // |n_i| <= m is necessary for ‖2π n / L‖ < cutoff.
    let m = (cutoff / step).floor() as i64;
    let cutoff2 = cutoff * cutoff;

    let mut vectors = Vec::new();
    let mut index = vec![-m; dim];
    'odometer: loop {
        let norm2: i64 = index.iter().map(|&n| n * n).sum();
        let first_nonzero = index.iter().find(|&&n| n != 0);
        if let Some(&lead) = first_nonzero {
            if lead > 0 {
                // κ = (2π/L)² · Σ n_i², with the integer sum formed exactly.
                let kappa = step * step * norm2 as f64;
                if kappa < cutoff2 {
                    vectors.push(WaveVector {
                        index: index.clone(),
                        components: index.iter().map(|&n| step * n as f64).collect(),
                        kappa,
                    });
                }
            }
        }
        // Advance the index odometer in lexicographic order.
        for axis in (0..dim).rev() {
            if index[axis] < m {
                index[axis] += 1;
                continue 'odometer;
            }
            index[axis] = -m;
        }
        break;
    }

    if vectors.is_empty() {
        return Err(Error::EmptyGrid {
            cutoff,
            min_cutoff: step,
        });
    }
    Ok(WaveGrid {
        dim,
        box_length,
        cutoff,
        vectors,
    })
}
