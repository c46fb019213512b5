//! Stable matching of the stationarized integer lattice with a Poisson
//! sample on the torus.
//!
//! The lattice `Z^d` restricted to `[0,L)^d` is shifted by a global uniform
//! vector in `[0,1)^d`. An independent Poisson sample of intensity
//! `alpha > 1` is then matched to the lattice by iterated mutual nearest
//! neighbors under torus distance: in each round every unmatched site points
//! to its nearest unmatched sample point and vice versa, and mutual pairs are
//! matched simultaneously. The output is the matched sample points only, one
//! per lattice site, so the count is exactly `L^d`.
//!
//! A Poisson draw with fewer points than lattice sites cannot be matched; it
//! is discarded and redrawn from the continuing stream, a bounded number of
//! times, with redraws counted in the run statistics.

use crate::error::{Error, Result};
use crate::pattern::{torus_delta, PointPattern};
use crate::rng::{replicate_rng, ReplicateRng};
use rand::RngExt;

use super::{poisson_count, push_uniform_point, Model, ModelConfig, SimStats};

/// Degenerate Poisson redraws allowed before giving up.
const MAX_RESAMPLES: u32 = 64;

/// Draw order: lattice shift first (one uniform per axis), then the Poisson
/// count, then sample coordinates point-major; a redraw repeats the count
/// and coordinates from the same stream.
pub(super) fn generate(
    config: &ModelConfig,
    rng: &mut ReplicateRng,
    stats: &mut SimStats,
) -> Result<PointPattern> {
    let dim = config.dim;
    let length = config.box_length;
    let cells = length as usize;
    let n_sites = cells.pow(dim as u32);
    let volume = length.powi(dim as i32);
    let mut shift = [0.0f64; 3];
    for s in shift.iter_mut().take(dim) {
        *s = rng.random::<f64>();
    }
    for redraw in 0..=MAX_RESAMPLES {
        let n_pts = poisson_count(rng, config.alpha * volume);
        let mut pts = Vec::with_capacity(n_pts * dim);
        for _ in 0..n_pts {
            push_uniform_point(rng, dim, length, &mut pts);
        }
        if n_pts < n_sites {
            continue;
        }
        let pair_of_site = match_lattice(dim, cells, length, &shift[..dim], &pts)?;
        let mut coords = Vec::with_capacity(n_sites * dim);
        for &j in &pair_of_site {
            let start = j as usize * dim;
            coords.extend_from_slice(&pts[start..start + dim]);
        }
        stats.resamples += redraw;
        return PointPattern::new(dim, length, coords);
    }
    Err(Error::Degenerate(format!(
        "matching: {MAX_RESAMPLES} consecutive Poisson draws fell below the \
         lattice count {n_sites}"
    )))
}

/// Matched-lattice sample with exactly `L^d` points.
pub fn sim_matching(config: &ModelConfig, seed: u64) -> Result<PointPattern> {
    let mut config = config.clone();
    config.model = Model::Matching;
    config.validate()?;
    let mut stats = SimStats::default();
    generate(&config, &mut replicate_rng(seed, 0), &mut stats)
}

/// Runs the mutual-nearest-neighbor rounds; `pts` must hold at least
/// `cells^dim` points. Returns the matched point index per lattice site in
/// lexicographic site order.
fn match_lattice(
    dim: usize,
    cells: usize,
    length: f64,
    shift: &[f64],
    pts: &[f64],
) -> Result<Vec<u32>> {
    let n_sites = cells.pow(dim as u32);
    let n_pts = pts.len() / dim;
    let grid = Grid { dim, cells, length };

    let mut cell_pts: Vec<Vec<u32>> = vec![Vec::new(); n_sites];
    for j in 0..n_pts {
        let q = &pts[j * dim..(j + 1) * dim];
        cell_pts[grid.cell_of_point(q)].push(j as u32);
    }

    let mut site_matched = vec![false; n_sites];
    let mut pt_matched = vec![false; n_pts];
    let mut site_choice = vec![u32::MAX; n_sites];
    let mut pair_of_site = vec![u32::MAX; n_sites];
    let mut remaining = n_sites;
    while remaining > 0 {
        let mut chosen: Vec<u32> = Vec::new();
        for site in 0..n_sites {
            if site_matched[site] {
                continue;
            }
            let j = grid.nearest_point(site, shift, pts, &cell_pts, &pt_matched);
            site_choice[site] = j;
            chosen.push(j);
        }
        chosen.sort_unstable();
        chosen.dedup();
        let mut round_pairs: Vec<(usize, u32)> = Vec::new();
        for &j in &chosen {
            let site = grid.nearest_site(&pts[j as usize * dim..(j as usize + 1) * dim], shift, &site_matched);
            if site_choice[site] == j {
                round_pairs.push((site, j));
            }
        }
        if round_pairs.is_empty() {
            return Err(Error::Degenerate(
                "matching round produced no mutual pair".into(),
            ));
        }
        for (site, j) in round_pairs {
            site_matched[site] = true;
            pt_matched[j as usize] = true;
            pair_of_site[site] = j;
            remaining -= 1;
        }
    }
    Ok(pair_of_site)
}

/// Unit-cell grid over the torus; lattice site `m` sits at `m + shift`,
/// inside cell `m`, so site index and cell index coincide.
struct Grid {
    dim: usize,
    cells: usize,
    length: f64,
}

impl Grid {
    fn cell_of_point(&self, q: &[f64]) -> usize {
        let mut idx = 0usize;
        for &c in q {
            let k = (c as usize).min(self.cells - 1);
            idx = idx * self.cells + k;
        }
        idx
    }

    fn decode(&self, mut flat: usize, out: &mut [usize; 3]) {
        for a in (0..self.dim).rev() {
            out[a] = flat % self.cells;
            flat /= self.cells;
        }
    }

    fn site_point_d2(&self, site: &[usize; 3], shift: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.dim {
            let d = torus_delta(q[a], site[a] as f64 + shift[a], self.length);
            acc += d * d;
        }
        acc
    }

    /// Nearest unmatched sample point to lattice site `site`, scanning cell
    /// shells outward. A point in a cell at Chebyshev cell distance `c` lies
    /// at Euclidean distance at least `c - 1`, so the scan stops once the
    /// incumbent beats every unscanned shell.
    fn nearest_point(
        &self,
        site: usize,
        shift: &[f64],
        pts: &[f64],
        cell_pts: &[Vec<u32>],
        pt_matched: &[bool],
    ) -> u32 {
        let mut m = [0usize; 3];
        self.decode(site, &mut m);
        let mut best = f64::INFINITY;
        let mut best_j = u32::MAX;
        let mut c = 0usize;
        loop {
            if 2 * c + 1 > self.cells {
                for (j, q) in pts.chunks_exact(self.dim).enumerate() {
                    if !pt_matched[j] {
                        let d2 = self.site_point_d2(&m, shift, q);
                        if d2 < best {
                            best = d2;
                            best_j = j as u32;
                        }
                    }
                }
                return best_j;
            }
            self.for_shell_cells(&m, c, |cell| {
                for &j in &cell_pts[cell] {
                    if !pt_matched[j as usize] {
                        let q = &pts[j as usize * self.dim..(j as usize + 1) * self.dim];
                        let d2 = self.site_point_d2(&m, shift, q);
                        if d2 < best {
                            best = d2;
                            best_j = j;
                        }
                    }
                }
            });
            let reach = c as f64;
            if best_j != u32::MAX && best <= reach * reach {
                return best_j;
            }
            c += 1;
        }
    }

    /// Nearest unmatched lattice site to sample point `q`. The site in cell
    /// shell `c` around the rounded anchor lies at distance at least
    /// `c - 1/2`, giving the stopping rule.
    fn nearest_site(&self, q: &[f64], shift: &[f64], site_matched: &[bool]) -> usize {
        let mut anchor = [0usize; 3];
        for a in 0..self.dim {
            let k = (q[a] - shift[a]).round() as i64;
            anchor[a] = k.rem_euclid(self.cells as i64) as usize;
        }
        let mut best = f64::INFINITY;
        let mut best_site = usize::MAX;
        let mut site = [0usize; 3];
        let mut c = 0usize;
        loop {
            if 2 * c + 1 > self.cells {
                for flat in 0..site_matched.len() {
                    if !site_matched[flat] {
                        self.decode(flat, &mut site);
                        let d2 = self.site_point_d2(&site, shift, q);
                        if d2 < best {
                            best = d2;
                            best_site = flat;
                        }
                    }
                }
                return best_site;
            }
            self.for_shell_cells(&anchor, c, |flat| {
                if !site_matched[flat] {
                    let mut s = [0usize; 3];
                    self.decode(flat, &mut s);
                    let d2 = self.site_point_d2(&s, shift, q);
                    if d2 < best {
                        best = d2;
                        best_site = flat;
                    }
                }
            });
            let reach = c as f64 + 0.5;
            if best_site != usize::MAX && best <= reach * reach {
                return best_site;
            }
            c += 1;
        }
    }

    /// Visits the flat index of every cell whose Chebyshev offset from
    /// `center` is exactly `c`. Caller guarantees `2c + 1 <= cells`, so the
    /// wrapped offsets are distinct.
    fn for_shell_cells(&self, center: &[usize; 3], c: usize, mut visit: impl FnMut(usize)) {
        let m = self.cells as i64;
        let ci = c as i64;
        let width = 2 * ci + 1;
        let total = (width as usize).pow(self.dim as u32);
        let mut offs = [0i64; 3];
        for flat in 0..total {
            let mut rem = flat;
            let mut cheb = 0i64;
            for a in 0..self.dim {
                let o = (rem % width as usize) as i64 - ci;
                rem /= width as usize;
                offs[a] = o;
                cheb = cheb.max(o.abs());
            }
            if cheb != ci {
                continue;
            }
            let mut idx = 0usize;
            for a in 0..self.dim {
                let k = (center[a] as i64 + offs[a]).rem_euclid(m) as usize;
                idx = idx * self.cells + k;
            }
            visit(idx);
        }
    }
}
