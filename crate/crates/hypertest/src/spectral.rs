//! Scattering intensities of point patterns at reciprocal-lattice wave
//! vectors, plus the empirical diagnostics built on them.
//!
//! Sums are direct `O(N·n)` evaluations (the admissible vector sets are
//! small), accumulated with Neumaier-compensated summation so that the heavy
//! cancellation in nearly-hyperuniform patterns stays below 1e-10.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{WaveGrid, WaveVector};
use crate::pattern::PointPattern;
use crate::util::Compensated;

/// Provenance carried alongside a spectral sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub dim: usize,
    pub box_length: f64,
    pub cutoff: f64,
    pub source: String,
}

impl SampleMeta {
    /// Placeholder meta for samples assembled from bare `(kappa, x)` rows.
    pub fn unknown() -> Self {
        Self {
            dim: 0,
            box_length: 0.0,
            cutoff: 0.0,
            source: "unknown".into(),
        }
    }
}

/// Paired `(κ_j, x_j)` observations: the scattering intensity `x_j` at a wave
/// vector with squared norm `κ_j`, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    pub entries: Vec<(f64, f64)>,
    pub meta: SampleMeta,
}

impl SpectralSample {
    /// Validates κ > 0 and x ≥ 0, all finite.
    pub fn new(entries: Vec<(f64, f64)>, meta: SampleMeta) -> Result<Self> {
        for (i, &(kappa, x)) in entries.iter().enumerate() {
            if !(kappa.is_finite() && kappa > 0.0) {
                return Err(Error::Config(format!(
                    "entry {i}: kappa = {kappa} must be positive and finite"
                )));
            }
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::Config(format!(
                    "entry {i}: x = {x} must be nonnegative and finite"
                )));
            }
        }
        Ok(Self { entries, meta })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }
}

/// `Σ_x e^{-i⟨k,x⟩}` over all pattern points, one wave vector at a time.
fn phase_sum(pattern: &PointPattern, components: &[f64]) -> Complex64 {
    let mut re = Compensated::default();
    let mut im = Compensated::default();
    for p in pattern.points() {
        let dot: f64 = components.iter().zip(p).map(|(&k, &x)| k * x).sum();
        let (s, c) = dot.sin_cos();
        re.add(c);
        im.add(-s);
    }
    Complex64::new(re.value(), im.value())
}

/// Tapered empirical Fourier transform `T(k) = r^{-d/2} Σ_x e^{-i⟨k,x⟩}`.
///
/// The taper is the box indicator (≡ 1 on the observation window), so the
/// sum runs plainly over all points; `r^d` is the window volume `L^d`.
/// An empty pattern yields 0. Conjugate symmetry `T(-k) = conj(T(k))` holds
/// exactly in floating point (negating `k` negates only the sine terms).
pub fn tapered_transform(pattern: &PointPattern, k: &WaveVector) -> Complex64 {
    let scale = pattern.box_length().powi(pattern.dim() as i32).sqrt();
    phase_sum(pattern, &k.components) / scale
}

/// Scattering intensity `|Σ_x e^{-i⟨k,x⟩}|² / N` at one wave vector.
///
/// Errors on an empty pattern (the `0⁻¹` convention is not silently
/// applied). Only reciprocal-lattice vectors are representable as
/// [`WaveVector`], which keeps the estimator unbiased by construction.
pub fn scattering_intensity(pattern: &PointPattern, k: &WaveVector) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let s = phase_sum(pattern, &k.components);
    Ok(s.norm_sqr() / pattern.len() as f64)
}

/// Maps [`scattering_intensity`] over a whole grid.
///
/// Shares per-point trigonometric tables across wave vectors: each point
/// contributes `e^{-i n_a t_a}` factors with `t_a = (2π/L)·x_a`, tabulated
/// per axis for every needed integer exponent, so the cost per point is
/// `O(Σ_a max|n_a|) + O(n·d)` complex multiplies instead of `O(n)` sin/cos
/// evaluations.
pub fn spectral_sample(pattern: &PointPattern, grid: &WaveGrid) -> Result<SpectralSample> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if pattern.dim() != grid.dim {
        return Err(Error::Config(format!(
            "pattern dimension {} does not match grid dimension {}",
            pattern.dim(),
            grid.dim
        )));
    }
    if pattern.box_length() != grid.box_length {
        return Err(Error::Config(format!(
            "pattern box length {} does not match grid box length {}",
            pattern.box_length(),
            grid.box_length
        )));
    }

    let dim = grid.dim;
    let n_vec = grid.len();
    // Largest exponent needed per axis.
    let mut max_n = vec![0usize; dim];
    for v in &grid.vectors {
        for (a, &idx) in v.index.iter().enumerate() {
            max_n[a] = max_n[a].max(idx.unsigned_abs() as usize);
        }
    }

    let step = 2.0 * std::f64::consts::PI / grid.box_length;
    let mut acc_re = vec![Compensated::default(); n_vec];
    let mut acc_im = vec![Compensated::default(); n_vec];
    // tables[a][m] = (cos(m t_a), sin(m t_a)) for the current point.
    let mut tables: Vec<Vec<(f64, f64)>> = max_n.iter().map(|&m| vec![(1.0, 0.0); m + 1]).collect();

    for p in pattern.points() {
        for (a, table) in tables.iter_mut().enumerate() {
            let t = step * p[a];
            for (m, entry) in table.iter_mut().enumerate().skip(1) {
                // Direct evaluation per exponent keeps every term within a
                // couple of ulps; recurrences would let the error grow with m.
                let (s, c) = (m as f64 * t).sin_cos();
                *entry = (c, s);
            }
        }
        for (j, v) in grid.vectors.iter().enumerate() {
            // e^{-i Σ_a n_a t_a} = ∏_a e^{-i n_a t_a}; negative exponents
            // conjugate the tabulated positive ones.
            let mut re = 1.0;
            let mut im = 0.0;
            for (a, &idx) in v.index.iter().enumerate() {
                let (c, s) = tables[a][idx.unsigned_abs() as usize];
                let s = if idx >= 0 { -s } else { s };
                let (nre, nim) = (re * c - im * s, re * s + im * c);
                re = nre;
                im = nim;
            }
            acc_re[j].add(re);
            acc_im[j].add(im);
        }
    }

    let n = pattern.len() as f64;
    let entries = grid
        .vectors
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let (re, im) = (acc_re[j].value(), acc_im[j].value());
            (v.kappa, (re * re + im * im) / n)
        })
        .collect();
    SpectralSample::new(
        entries,
        SampleMeta {
            dim,
            box_length: grid.box_length,
            cutoff: grid.cutoff,
            source: String::new(),
        },
    )
}

/// Complementary ECDF of `samples / mean(samples)` tabulated on a log-spaced
/// grid, with a leading `(0, P(scaled > 0))` row.
///
/// Errors on empty input or non-positive mean.
pub fn scaled_ccdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    const GRID_POINTS: usize = 256;
    if samples.is_empty() {
        return Err(Error::Degenerate("no samples for the CCDF".into()));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Degenerate(format!(
            "sample mean {mean} must be positive to scale the CCDF"
        )));
    }
    let mut scaled: Vec<f64> = samples.iter().map(|x| x / mean).collect();
    scaled.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = scaled.len() as f64;
    let frac_above = |z: f64| -> f64 { (scaled.len() - scaled.partition_point(|&v| v <= z)) as f64 / n };

    let hi = 1.05 * scaled[scaled.len() - 1];
    let min_pos = scaled.iter().copied().find(|&v| v > 0.0);
    let lo = match min_pos {
        Some(mp) => (0.5 * mp).max(1e-7 * hi),
        None => 1e-7 * hi,
    };

    let mut table = Vec::with_capacity(GRID_POINTS + 1);
    table.push((0.0, frac_above(0.0)));
    if hi > 0.0 && lo > 0.0 && hi > lo {
        let ratio = (hi / lo).ln();
        for i in 0..GRID_POINTS {
            let z = lo * (ratio * i as f64 / (GRID_POINTS - 1) as f64).exp();
            table.push((z, frac_above(z)));
        }
    }
    Ok(table)
}

/// Pearson correlation matrix of intensity samples across replicates.
///
/// `data` is row-major with one replicate per row and `cols` wave vectors
/// per row. Requires at least 2 columns and 100 rows; errors on a
/// zero-variance column. Returns the flat `cols × cols` matrix with unit
/// diagonal.
pub fn cross_correlation(data: &[f64], cols: usize) -> Result<Vec<f64>> {
    if cols < 2 {
        return Err(Error::Config(format!(
            "need at least 2 wave vectors for cross-correlation, got {cols}"
        )));
    }
    if data.len() % cols != 0 {
        return Err(Error::Config(format!(
            "data length {} is not a multiple of the column count {cols}",
            data.len()
        )));
    }
    let rows = data.len() / cols;
    if rows < 100 {
        return Err(Error::Config(format!(
            "need at least 100 replicates for cross-correlation, got {rows}"
        )));
    }

    let nf = rows as f64;
    let mut mean = vec![0.0f64; cols];
    for row in data.chunks_exact(cols) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nf;
    }

    // Accumulate the upper triangle of the centered cross-product matrix.
    let mut cov = vec![0.0f64; cols * cols];
    let mut centered = vec![0.0f64; cols];
    for row in data.chunks_exact(cols) {
        for j in 0..cols {
            centered[j] = row[j] - mean[j];
        }
        for j in 0..cols {
            let cj = centered[j];
            for l in j..cols {
                cov[j * cols + l] += cj * centered[l];
            }
        }
    }

    for j in 0..cols {
        if cov[j * cols + j] <= 0.0 {
            return Err(Error::Degenerate(format!(
                "column {j} has zero variance; correlation undefined"
            )));
        }
    }
    let mut corr = vec![0.0f64; cols * cols];
    for j in 0..cols {
        corr[j * cols + j] = 1.0;
        for l in (j + 1)..cols {
            let r = cov[j * cols + l] / (cov[j * cols + j] * cov[l * cols + l]).sqrt();
            let r = r.clamp(-1.0, 1.0);
            corr[j * cols + l] = r;
            corr[l * cols + j] = r;
        }
    }
    Ok(corr)
}

/// Writes a sample as `kappa,x` CSV with `#`-prefixed provenance comments.
pub fn write_sample<W: Write>(
    w: &mut W,
    sample: &SpectralSample,
    extra_comments: &[String],
) -> Result<()> {
    writeln!(w, "# dim {}", sample.meta.dim)?;
    writeln!(w, "# box_length {}", sample.meta.box_length)?;
    writeln!(w, "# cutoff {}", sample.meta.cutoff)?;
    writeln!(w, "# source {}", sample.meta.source)?;
    for c in extra_comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "kappa,x")?;
    for &(kappa, x) in &sample.entries {
        writeln!(w, "{kappa},{x}")?;
    }
    Ok(())
}

/// Reads a `kappa,x` CSV, recovering any provenance comments it carries.
pub fn read_sample<R: BufRead>(r: R) -> Result<SpectralSample> {
    let mut meta = SampleMeta::unknown();
    let mut entries = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((key, value)) = comment.split_once(' ') {
                match key {
                    "dim" => meta.dim = value.trim().parse().unwrap_or(meta.dim),
                    "box_length" => {
                        meta.box_length = value.trim().parse().unwrap_or(meta.box_length)
                    }
                    "cutoff" => meta.cutoff = value.trim().parse().unwrap_or(meta.cutoff),
                    "source" => meta.source = value.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        if !saw_header {
            if trimmed != "kappa,x" {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `kappa,x`, got `{trimmed}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let (a, b) = trimmed.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("expected `kappa,x` row, got `{trimmed}`"),
        })?;
        let kappa: f64 = a.trim().parse().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad kappa `{a}`: {e}"),
        })?;
        let x: f64 = b.trim().parse().map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad x `{b}`: {e}"),
        })?;
        entries.push((kappa, x));
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing `kappa,x` header".into(),
        });
    }
    SpectralSample::new(entries, meta)
}

/// Reads a sample from a file path.
pub fn read_sample_path<P: AsRef<Path>>(path: P) -> Result<SpectralSample> {
    read_sample(BufReader::new(File::open(path)?))
}

/// Writes a sample to a file path.
pub fn write_sample_path<P: AsRef<Path>>(
    path: P,
    sample: &SpectralSample,
    extra_comments: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sample(&mut w, sample, extra_comments)?;
    w.flush()?;
    Ok(())
}
