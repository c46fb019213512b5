//! Point patterns on the flat torus `[0, L)^d`, periodic geometry helpers,
//! and the plain-text interchange format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A finite point set on the flat torus `[0, L)^d`.
///
/// Coordinates are stored flat, point-major, each in `[0, L)`. Spectral
/// observables are unaffected by the choice of fundamental domain: shifting
/// every point by a constant vector multiplies each reciprocal-lattice
/// Fourier sum by a unit-modulus factor that cancels in `|·|²`, so `[0, L)^d`
/// is equivalent to a box centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    dim: usize,
    box_length: f64,
    coords: Vec<f64>,
}

impl PointPattern {
    /// Builds a pattern from flat point-major coordinates.
    ///
    /// Requires `dim >= 1`, a positive finite `box_length`, a coordinate
    /// count divisible by `dim`, and every coordinate in `[0, box_length)`.
    /// Empty patterns are representable; spectral operations reject them.
    pub fn new(dim: usize, box_length: f64, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("pattern dimension must be >= 1".into()));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Config(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Config(format!(
                "coordinate count {} is not a multiple of dim {}",
                coords.len(),
                dim
            )));
        }
        for (i, &c) in coords.iter().enumerate() {
            if !(c.is_finite() && (0.0..box_length).contains(&c)) {
                return Err(Error::Config(format!(
                    "coordinate {} of point {} is {} (must lie in [0, {}))",
                    i % dim,
                    i / dim,
                    c,
                    box_length
                )));
            }
        }
        Ok(Self {
            dim,
            box_length,
            coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Iterator over points as coordinate slices.
    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Flat point-major coordinate storage.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Reduces a coordinate into the fundamental domain `[0, L)`.
///
/// `rem_euclid` can round up to exactly `L` for tiny negative inputs; that
/// edge is folded back to `0`.
pub fn wrap_coord(c: f64, box_length: f64) -> f64 {
    let w = c.rem_euclid(box_length);
    if w >= box_length {
        0.0
    } else {
        w
    }
}

/// Per-coordinate minimal-image difference `a - b` on the torus, each
/// component in `[-L/2, L/2)`.
///
/// Inputs are coordinates in `[0, L)`; `a` and `b` must share a length.
pub fn torus_diff(a: &[f64], b: &[f64], box_length: f64) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "dimension mismatch in torus_diff");
    a.iter()
        .zip(b)
        .map(|(&ai, &bi)| torus_delta(ai, bi, box_length))
        .collect()
}

/// Scalar minimal-image difference `a - b` in `[-L/2, L/2)`.
#[inline]
pub fn torus_delta(a: f64, b: f64, box_length: f64) -> f64 {
    let mut d = a - b;
    if d < -0.5 * box_length {
        d += box_length;
    } else if d >= 0.5 * box_length {
        d -= box_length;
    }
    d
}

/// Squared torus distance between two points given as coordinate slices.
#[inline]
pub fn torus_dist2(a: &[f64], b: &[f64], box_length: f64) -> f64 {
    let mut acc = 0.0;
    for (&ai, &bi) in a.iter().zip(b) {
        let d = torus_delta(ai, bi, box_length);
        acc += d * d;
    }
    acc
}

/// Writes a pattern in the text interchange format.
///
/// Layout: optional `#`-prefixed comment lines, then a header line `d L`,
/// then one line per point with `d` whitespace-separated coordinates.
/// Floats use shortest round-trip formatting, so a read-back reproduces the
/// exact same values.
pub fn write_pattern<W: Write>(
    w: &mut W,
    pattern: &PointPattern,
    comments: &[String],
) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{} {}", pattern.dim(), pattern.box_length())?;
    let mut line = String::new();
    for p in pattern.points() {
        line.clear();
        for (j, c) in p.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{c}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads a pattern from the text interchange format.
///
/// Blank lines and lines starting with `#` are ignored anywhere in the file.
pub fn read_pattern<R: BufRead>(r: R) -> Result<PointPattern> {
    let mut dim: usize = 0;
    let mut box_length: f64 = 0.0;
    let mut coords = Vec::new();
    let mut saw_header = false;

    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if !saw_header {
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `d L`, got {} tokens", tokens.len()),
                });
            }
            dim = tokens[0].parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad dimension `{}`: {e}", tokens[0]),
            })?;
            box_length = tokens[1].parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad box length `{}`: {e}", tokens[1]),
            })?;
            saw_header = true;
            continue;
        }
        if tokens.len() != dim {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {dim} coordinates, got {}", tokens.len()),
            });
        }
        for t in tokens {
            let c: f64 = t.parse().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad coordinate `{t}`: {e}"),
            })?;
            coords.push(c);
        }
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 0,
            msg: "missing header line `d L`".into(),
        });
    }
    PointPattern::new(dim, box_length, coords)
}

/// Reads a pattern from a file path.
pub fn read_pattern_path<P: AsRef<Path>>(path: P) -> Result<PointPattern> {
    read_pattern(BufReader::new(File::open(path)?))
}

/// Writes a pattern to a file path.
pub fn write_pattern_path<P: AsRef<Path>>(
    path: P,
    pattern: &PointPattern,
    comments: &[String],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_pattern(&mut w, pattern, comments)?;
    w.flush()?;
    Ok(())
}
