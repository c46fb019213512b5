//! Maximum-likelihood fits of the parabolic two-parameter intensity model
//! and the likelihood-ratio statistic for the hyperuniformity constraint.
//!
//! The model treats each scattering value as an independent exponential with
//! mean `s + t·κ_j`; the constraint under test pins `s = 0`. The
//! unconstrained fit maximizes a one-dimensional profile in `y = s/t` over
//! `y ∈ [0, ∞)`, with the flat fit `(mean x, 0)` covering the `y → ∞` limit.

use crate::error::{Error, Result};
use crate::spectral::SpectralSample;
use crate::util::Compensated;

/// Likelihood-ratio values at or below this are treated as exact zeros: the
/// unconstrained fit is collapsed onto the constrained one and the result is
/// flagged as sitting on the boundary atom.
pub const ATOM_THRESHOLD: f64 = 1e-8;

/// Iteration budget for the one-dimensional maximizer, bracketing included.
const MAX_OPT_ITER: usize = 500;

/// Relative tolerance on the profile coordinate `y` at convergence.
const OPT_REL_TOL: f64 = 1e-14;

/// Both maximum-likelihood fits of one spectral sample plus the
/// likelihood-ratio statistic comparing them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Slope of the constrained fit `(0, t0_hat)`.
    pub t0_hat: f64,
    /// Log-likelihood of the constrained fit.
    pub h0: f64,
    /// Intercept of the unconstrained fit; zero exactly when `atom` is set.
    pub s_hat: f64,
    /// Slope of the unconstrained fit.
    pub t1_hat: f64,
    /// Log-likelihood of the unconstrained fit; never below `h0`.
    pub h1: f64,
    /// Likelihood-ratio statistic `2·(h1 - h0)`, clipped to exact zero when
    /// it falls at or below [`ATOM_THRESHOLD`].
    pub t_stat: f64,
    /// True when the unconstrained maximizer sits on the `s = 0` boundary.
    pub atom: bool,
}

/// Checks that every scattering value is strictly positive, as the
/// likelihood requires. Returns the entries for convenience.
fn positive_entries(sample: &SpectralSample) -> Result<&[(f64, f64)]> {
    let entries = sample.entries();
    for (i, &(_, x)) in entries.iter().enumerate() {
        if x <= 0.0 {
            return Err(Error::NonPositiveSample { index: i, value: x });
        }
    }
    Ok(entries)
}

/// `Σ_j ln(κ_j + y)` with blocked products so the `ln` count drops without
/// losing accuracy. Requires every `κ_j + y > 0`.
fn sum_ln_shifted(entries: &[(f64, f64)], y: f64) -> f64 {
    let mut acc = Compensated::default();
    let mut prod = 1.0f64;
    let mut cnt = 0u32;
    for &(k, _) in entries {
        prod *= k + y;
        cnt += 1;
        if cnt == 8 || !(1e-100..1e100).contains(&prod) {
            acc.add(prod.ln());
            prod = 1.0;
            cnt = 0;
        }
    }
    if cnt > 0 {
        acc.add(prod.ln());
    }
    acc.value()
}

/// Log-likelihood of the pair `(s, t)` on a spectral sample:
/// `Σ_j [-ln(s + t·κ_j) - x_j/(s + t·κ_j)]`.
///
/// Errors when `s < 0` or any fitted mean `s + t·κ_j` is not strictly
/// positive, i.e. when the pair leaves the admissible cone.
pub fn loglike(sample: &SpectralSample, s: f64, t: f64) -> Result<f64> {
    let entries = sample.entries();
    if entries.is_empty() {
        return Err(Error::Degenerate("empty spectral sample".into()));
    }
    if !(s.is_finite() && t.is_finite()) || s < 0.0 {
        return Err(Error::OutsideCone { s, t });
    }
    let mut acc = Compensated::default();
    for &(k, x) in entries {
        let m = s + t * k;
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::OutsideCone { s, t });
        }
        acc.add(-m.ln());
        acc.add(-x / m);
    }
    Ok(acc.value())
}

/// Constrained maximum likelihood under `s = 0`: returns `(t0_hat, h0)` with
/// the closed form `t0_hat = (1/n)·Σ x_j/κ_j`.
pub fn mle_h0(sample: &SpectralSample) -> Result<(f64, f64)> {
    let entries = positive_entries(sample)?;
    if entries.is_empty() {
        return Err(Error::Degenerate("empty spectral sample".into()));
    }
    let mut acc = Compensated::default();
    for &(k, x) in entries {
        acc.add(x / k);
    }
    let t0 = acc.value() / entries.len() as f64;
    let h0 = loglike(sample, 0.0, t0)?;
    Ok((t0, h0))
}

/// Profile objective in `y = s/t` for `y ≥ 0`, equal to the full
/// log-likelihood along the profiled ray up to the constant
/// `n·ln n - n + 1`:
/// `-Σ_j ln(κ_j + y) - 1 - n·ln(Σ_j x_j/(κ_j + y))`.
///
/// The caller must supply a finite `y ≥ 0`; values in `[0, ∞)` are always in
/// the objective's domain when the sample is strictly positive.
pub fn profile_loglike(sample: &SpectralSample, y: f64) -> f64 {
    let entries = sample.entries();
    assert!(y >= 0.0 && y.is_finite(), "profile coordinate must be finite and nonnegative");
    assert!(!entries.is_empty(), "profile objective needs a nonempty sample");
    let n = entries.len() as f64;
    let mut ratio = Compensated::default();
    for &(k, x) in entries {
        ratio.add(x / (k + y));
    }
    -sum_ln_shifted(entries, y) - 1.0 - n * ratio.value().ln()
}

/// Derivative of the profile objective at shift `y ≥ 0`:
/// `-Σ 1/(κ_j + y) + n·(Σ x_j/(κ_j + y)²)/(Σ x_j/(κ_j + y))`.
fn profile_derivative(entries: &[(f64, f64)], y: f64) -> f64 {
    let n = entries.len() as f64;
    let mut inv = Compensated::default();
    let mut r1 = Compensated::default();
    let mut r2 = Compensated::default();
    for &(k, x) in entries {
        let d = k + y;
        inv.add(1.0 / d);
        r1.add(x / d);
        r2.add(x / (d * d));
    }
    -inv.value() + n * r2.value() / r1.value()
}

/// Right derivative of the profile objective at `y = 0`:
/// `-Σ 1/κ_j + n·(Σ x_j/κ_j²)/(Σ x_j/κ_j)`.
///
/// Its sign decides the boundary atom: nonpositive means the constrained fit
/// is already the unconstrained maximizer over `y ∈ [0, ∞)`.
pub fn profile_derivative_at_zero(sample: &SpectralSample) -> Result<f64> {
    let entries = positive_entries(sample)?;
    if entries.is_empty() {
        return Err(Error::Degenerate("empty spectral sample".into()));
    }
    Ok(profile_derivative(entries, 0.0))
}

/// Brent's method specialized to maximization: combines golden-section
/// steps with parabolic interpolation through the three best points.
/// Returns `(argmax, max)` once the bracket shrinks below
/// `rel_tol·|y| + abs_tol`.
fn brent_max<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<(f64, f64)> {
    const GOLDEN: f64 = 0.381_966_011_250_105_2;
    let (mut sa, mut sb) = (a, b);
    let mut x = sa + GOLDEN * (sb - sa);
    let (mut w, mut v) = (x, x);
    let mut fx = -f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = 0.0f64;
    let mut e = 0.0f64;
    for _ in 0..MAX_OPT_ITER {
        let m = 0.5 * (sa + sb);
        let tol = rel_tol * x.abs() + abs_tol;
        let tol2 = 2.0 * tol;
        if (x - m).abs() <= tol2 - 0.5 * (sb - sa) {
            return Ok((x, -fx));
        }
        let mut p = 0.0f64;
        let mut q = 0.0f64;
        let mut r = 0.0f64;
        if e.abs() > tol {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            r = e;
            e = d;
        }
        if p.abs() < (0.5 * q * r).abs() && p > q * (sa - x) && p < q * (sb - x) {
            d = p / q;
            let u = x + d;
            if u - sa < tol2 || sb - u < tol2 {
                d = if x < m { tol } else { -tol };
            }
        } else {
            e = if x < m { sb - x } else { sa - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol {
            x + d
        } else if d > 0.0 {
            x + tol
        } else {
            x - tol
        };
        let fu = -f(u);
        if fu <= fx {
            if u < x {
                sb = x;
            } else {
                sa = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                sa = u;
            } else {
                sb = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::NoConvergence { what: "profile maximizer", budget: MAX_OPT_ITER })
}

/// Recovers the full parameter pair from a profile coordinate:
/// `t = (1/n)·Σ x_j/(y + κ_j)`, `s = y·t`.
fn recover_from_profile(entries: &[(f64, f64)], y: f64) -> (f64, f64) {
    let mut acc = Compensated::default();
    for &(k, x) in entries {
        acc.add(x / (y + k));
    }
    let t = acc.value() / entries.len() as f64;
    (y * t, t)
}

/// Unconstrained maximum likelihood over the admissible cone, searched along
/// `y = s/t ∈ [0, ∞)`: returns `(s_hat, t1_hat, h1)`.
///
/// When the profile derivative at zero is nonpositive the constrained fit is
/// returned unchanged. Otherwise the profile is bracketed by doubling from
/// the largest `κ`, maximized with Brent's method, and the result compared
/// against the flat fit `(mean x, 0)` that the ray approaches as `y → ∞`;
/// the best log-likelihood wins.
pub fn mle_full(sample: &SpectralSample) -> Result<(f64, f64, f64)> {
    let entries = positive_entries(sample)?;
    if entries.len() < 2 {
        return Err(Error::Config(format!(
            "unconstrained fit needs at least 2 observations, got {}",
            entries.len()
        )));
    }
    let (t0, h0) = mle_h0(sample)?;
    let d0 = profile_derivative_at_zero(sample)?;
    if d0 <= 0.0 {
        return Ok((0.0, t0, h0));
    }
    full_fit_unconstrained(sample, entries, t0, h0)
}

/// Interior search plus the flat-limit candidate; callers have already
/// established `d0 > 0` so the maximizer is away from `y = 0`.
fn full_fit_unconstrained(
    sample: &SpectralSample,
    entries: &[(f64, f64)],
    t0: f64,
    h0: f64,
) -> Result<(f64, f64, f64)> {
    let kmax = entries.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let n = entries.len() as f64;

    let mut best = (0.0, t0, h0);

    let mean_x = {
        let mut acc = Compensated::default();
        for &(_, x) in entries {
            acc.add(x);
        }
        acc.value() / n
    };
    let h_flat = loglike(sample, mean_x, 0.0)?;
    if h_flat > best.2 {
        best = (mean_x, 0.0, h_flat);
    }

    // Bracket the profile maximum by walking a doubling ladder until the
    // objective first decreases; no turnover means the flat limit dominates.
    let pl = |y: f64| profile_loglike(sample, y);
    let ladder = |i: i32| kmax * ((i - 30) as f64).exp2();
    let mut f_prev = pl(0.0);
    let mut y_prev = 0.0f64;
    let mut y_prev2 = 0.0f64;
    let mut bracket = None;
    for i in 0..=110 {
        let y = ladder(i);
        let fy = pl(y);
        if fy < f_prev {
            bracket = Some((y_prev2, y));
            break;
        }
        y_prev2 = y_prev;
        y_prev = y;
        f_prev = fy;
    }

    if let Some((lo, hi)) = bracket {
        let abs_tol = 1e-18 * kmax;
        let (y_brent, _) = brent_max(pl, lo, hi, OPT_REL_TOL, abs_tol)?;
        let y_star = polish_stationary(entries, y_brent, lo, hi);
        let (s, t1) = recover_from_profile(entries, y_star);
        let h_int = loglike(sample, s, t1)?;
        if h_int > best.2 {
            best = (s, t1, h_int);
        }
    }

    Ok(best)
}

/// Sharpens a value-search maximizer to a root of the analytic profile
/// derivative. Value-only search localizes an argmax no better than
/// `sqrt(eps)·y`; bisection on the derivative reaches machine precision,
/// which the scale-equivariance guarantee on `(s_hat, t1_hat)` needs.
/// Returns the input unchanged when no sign change brackets it.
fn polish_stationary(entries: &[(f64, f64)], y: f64, lo: f64, hi: f64) -> f64 {
    let g = |y: f64| profile_derivative(entries, y);
    let mut width = 1e-9;
    let (mut a, mut b);
    loop {
        a = (y * (1.0 - width)).max(lo);
        b = (y * (1.0 + width)).min(hi);
        if g(a) > 0.0 && g(b) < 0.0 {
            break;
        }
        width *= 8.0;
        if width > 0.3 {
            return y;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if gm > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Runs both fits and forms the likelihood-ratio statistic `2·(h1 - h0)`.
///
/// Values at or below [`ATOM_THRESHOLD`] are numerically indistinguishable
/// from the boundary, so the result is collapsed onto the constrained fit
/// with `t_stat = 0` and `atom` set.
pub fn lr_statistic(sample: &SpectralSample) -> Result<FitResult> {
    let entries = positive_entries(sample)?;
    if entries.len() < 2 {
        return Err(Error::Config(format!(
            "likelihood-ratio statistic needs at least 2 observations, got {}",
            entries.len()
        )));
    }
    let (t0, h0) = mle_h0(sample)?;
    let d0 = profile_derivative_at_zero(sample)?;
    if d0 <= 0.0 {
        return Ok(FitResult {
            t0_hat: t0,
            h0,
            s_hat: 0.0,
            t1_hat: t0,
            h1: h0,
            t_stat: 0.0,
            atom: true,
        });
    }
    let (s, t1, h1) = full_fit_unconstrained(sample, entries, t0, h0)?;
    let t_stat = 2.0 * (h1 - h0);
    if t_stat <= ATOM_THRESHOLD {
        return Ok(FitResult {
            t0_hat: t0,
            h0,
            s_hat: 0.0,
            t1_hat: t0,
            h1: h0,
            t_stat: 0.0,
            atom: true,
        });
    }
    Ok(FitResult { t0_hat: t0, h0, s_hat: s, t1_hat: t1, h1, t_stat, atom: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{SampleMeta, SpectralSample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample(kappas: &[f64], xs: &[f64]) -> SpectralSample {
        let entries: Vec<(f64, f64)> =
            kappas.iter().copied().zip(xs.iter().copied()).collect();
        SpectralSample::new(entries, SampleMeta::unknown()).unwrap()
    }

    #[test]
    fn loglike_single_entry() {
        let s = sample(&[1.0], &[1.0]);
        assert_relative_eq!(loglike(&s, 0.0, 1.0).unwrap(), -1.0, max_relative = 1e-15);
        let s2 = sample(&[1.0], &[2.0]);
        let expected = -(2.0f64.ln()) - 1.0;
        assert_relative_eq!(loglike(&s2, 1.0, 1.0).unwrap(), expected, max_relative = 1e-15);
    }

    #[test]
    fn loglike_rejects_outside_cone() {
        let s = sample(&[1.0, 2.0], &[1.0, 1.0]);
        assert!(loglike(&s, 0.0, 0.0).is_err());
        assert!(loglike(&s, -1.0, 1.0).is_err());
        assert!(loglike(&s, 0.1, -1.0).is_err());
        assert!(loglike(&s, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn loglike_accepts_negative_slope_inside_cone() {
        // s + t·κ stays positive for all κ up to 2 when s = 3, t = -1.
        let s = sample(&[1.0, 2.0], &[1.0, 1.0]);
        let expected = -(2.0f64.ln()) - 0.5 - 0.0 - 1.0;
        assert_relative_eq!(loglike(&s, 3.0, -1.0).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn loglike_scale_law() {
        // L(r·x; r·s, r·t) = L(x; s, t) - n·ln r.
        let kappas = [0.5, 1.0, 2.5, 4.0];
        let xs = [0.3, 1.7, 2.2, 0.9];
        let s = sample(&kappas, &xs);
        let base = loglike(&s, 0.4, 0.8).unwrap();
        for r in [1e-3, 7.0, 1e3] {
            let scaled_xs: Vec<f64> = xs.iter().map(|x| x * r).collect();
            let scaled = sample(&kappas, &scaled_xs);
            let got = loglike(&scaled, 0.4 * r, 0.8 * r).unwrap();
            assert_relative_eq!(got, base - 4.0 * r.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn mle_h0_closed_form() {
        let s = sample(&[1.0, 2.0], &[2.0, 8.0]);
        let (t0, h0) = mle_h0(&s).unwrap();
        assert_relative_eq!(t0, 3.0, max_relative = 1e-15);
        assert_relative_eq!(h0, loglike(&s, 0.0, 3.0).unwrap(), max_relative = 1e-15);

        let s2 = sample(&[0.5, 1.5, 3.0], &[0.5, 1.5, 3.0]);
        let (t0, _) = mle_h0(&s2).unwrap();
        assert_relative_eq!(t0, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn mle_h0_maximizes_along_constraint() {
        let s = sample(&[0.7, 1.3, 2.9], &[1.1, 0.4, 3.3]);
        let (t0, h0) = mle_h0(&s).unwrap();
        for dt in [-1e-3, 1e-3, -0.1, 0.1] {
            let h = loglike(&s, 0.0, t0 + dt).unwrap();
            assert!(h < h0, "perturbed slope {} beat the closed form", t0 + dt);
        }
    }

    #[test]
    fn rejects_nonpositive_values() {
        let s = sample(&[1.0, 2.0], &[1.0, 0.0]);
        assert!(matches!(
            mle_h0(&s),
            Err(Error::NonPositiveSample { index: 1, value }) if value == 0.0
        ));
        assert!(mle_full(&s).is_err());
        assert!(lr_statistic(&s).is_err());
        assert!(profile_derivative_at_zero(&s).is_err());
    }

    #[test]
    fn mle_full_needs_two_entries() {
        let s = sample(&[1.0], &[1.0]);
        assert!(matches!(mle_full(&s), Err(Error::Config(_))));
        assert!(matches!(lr_statistic(&s), Err(Error::Config(_))));
    }

    #[test]
    fn profile_value_worked_example() {
        // κ = (1,2), x = (1,1), y = 1:
        // -ln 2 - ln 3 - 1 - 2·ln(1/2 + 1/3).
        let s = sample(&[1.0, 2.0], &[1.0, 1.0]);
        let expected = -(2.0f64.ln()) - 3.0f64.ln() - 1.0 - 2.0 * (5.0f64 / 6.0).ln();
        assert_relative_eq!(profile_loglike(&s, 1.0), expected, max_relative = 1e-14);
    }

    #[test]
    fn profile_at_zero_matches_constrained_fit_up_to_constant() {
        // L̃(0) = h0 - (n·ln n - n + 1).
        let s = sample(&[0.4, 1.1, 2.2, 3.7, 5.0], &[0.9, 2.1, 0.3, 4.4, 1.6]);
        let n = 5.0f64;
        let (_, h0) = mle_h0(&s).unwrap();
        let offset = n * n.ln() - n + 1.0;
        assert_relative_eq!(profile_loglike(&s, 0.0), h0 - offset, max_relative = 1e-13);
    }

    #[test]
    fn profile_limit_at_infinity() {
        // L̃(y) → -1 - n·ln(Σ x_j) as y → ∞.
        let s = sample(&[1.0, 2.0, 3.0], &[0.5, 1.5, 2.5]);
        let limit = -1.0 - 3.0 * 4.5f64.ln();
        let far = profile_loglike(&s, 3.0e18);
        assert_relative_eq!(far, limit, max_relative = 1e-6);
    }

    #[test]
    fn derivative_worked_examples() {
        // x ∝ κ sits exactly on the constraint: derivative 0.
        let s = sample(&[0.5, 1.5, 3.0], &[1.0, 3.0, 6.0]);
        assert!(profile_derivative_at_zero(&s).unwrap().abs() < 1e-13);

        // κ = (1,2), x = (1,1): -3/2 + 2·(5/4)/(3/2) = 1/6.
        let s2 = sample(&[1.0, 2.0], &[1.0, 1.0]);
        assert_relative_eq!(
            profile_derivative_at_zero(&s2).unwrap(),
            1.0 / 6.0,
            max_relative = 1e-13
        );

        // Constant x: Cauchy-Schwarz makes the derivative strictly positive.
        let s3 = sample(&[0.3, 1.0, 2.0, 5.0], &[2.0, 2.0, 2.0, 2.0]);
        assert!(profile_derivative_at_zero(&s3).unwrap() > 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let cases = [
            (vec![1.0, 2.0], vec![1.0, 1.0]),
            (vec![0.4, 1.1, 2.2, 3.7], vec![0.9, 2.1, 0.3, 4.4]),
            (vec![0.05, 0.21, 0.33, 0.47, 0.56], vec![1.2, 0.7, 2.9, 0.4, 1.1]),
        ];
        for (kappas, xs) in cases {
            let s = sample(&kappas, &xs);
            let d0 = profile_derivative_at_zero(&s).unwrap();
            let eps = 1e-7;
            let fd = (profile_loglike(&s, eps) - profile_loglike(&s, 0.0)) / eps;
            assert_relative_eq!(d0, fd, max_relative = 1e-4);
        }
    }

    #[test]
    fn mle_full_atom_when_data_match_constraint() {
        // Dyadic inputs keep x/κ, 1/κ, and x/κ² exact, so the profile
        // derivative at zero is exactly 0.0 and the atom branch is taken.
        let s = sample(&[0.5, 1.0, 2.0], &[1.0, 2.0, 4.0]);
        assert_eq!(profile_derivative_at_zero(&s).unwrap(), 0.0);
        let (s_hat, t1, h1) = mle_full(&s).unwrap();
        let (t0, h0) = mle_h0(&s).unwrap();
        assert_eq!(s_hat, 0.0);
        assert_relative_eq!(t1, t0, max_relative = 1e-15);
        assert_relative_eq!(h1, h0, max_relative = 1e-15);
        assert_relative_eq!(t0, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn mle_full_flat_limit_wins() {
        // κ = (1,2), x = (1,1): the profile increases all the way to the
        // flat fit (1, 0), where the likelihood equals -2 exactly.
        let s = sample(&[1.0, 2.0], &[1.0, 1.0]);
        let (s_hat, t1, h1) = mle_full(&s).unwrap();
        assert_relative_eq!(s_hat, 1.0, max_relative = 1e-12);
        assert!(t1.abs() <= 1e-12);
        assert_relative_eq!(h1, -2.0, max_relative = 1e-12);

        let s2 = sample(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]);
        let (s_hat, t1, h1) = mle_full(&s2).unwrap();
        assert_relative_eq!(s_hat, 5.0, max_relative = 1e-12);
        assert!(t1.abs() <= 1e-12);
        assert_relative_eq!(h1, -3.0 * 5.0f64.ln() - 3.0, max_relative = 1e-12);
    }

    #[test]
    fn mle_full_interior_exact_fit() {
        // κ = (1,2), x = (2,3): the exact fit s = 1, t = 1 lies inside the
        // cone, so the profile maximum at y = 1 reproduces it.
        let s = sample(&[1.0, 2.0], &[2.0, 3.0]);
        let d0 = profile_derivative_at_zero(&s).unwrap();
        assert!(d0 > 0.0);
        let (s_hat, t1, h1) = mle_full(&s).unwrap();
        assert_relative_eq!(s_hat, 1.0, max_relative = 1e-9);
        assert_relative_eq!(t1, 1.0, max_relative = 1e-9);
        assert_relative_eq!(h1, -(6.0f64.ln()) - 2.0, max_relative = 1e-12);
    }

    #[test]
    fn mle_full_atom_with_negative_derivative() {
        // κ = (1,2), x = (1,3): derivative -0.1 at zero, so the boundary fit
        // (0, 5/4) is the maximizer over y ∈ [0, ∞).
        let s = sample(&[1.0, 2.0], &[1.0, 3.0]);
        let d0 = profile_derivative_at_zero(&s).unwrap();
        assert_relative_eq!(d0, -0.1, max_relative = 1e-12);
        let (s_hat, t1, _) = mle_full(&s).unwrap();
        assert_eq!(s_hat, 0.0);
        assert_relative_eq!(t1, 1.25, max_relative = 1e-15);
    }

    #[test]
    fn lr_statistic_atom_cases() {
        let s = sample(&[0.5, 1.0, 2.0], &[1.0, 2.0, 4.0]);
        let fit = lr_statistic(&s).unwrap();
        assert!(fit.atom);
        assert_eq!(fit.t_stat, 0.0);
        assert_eq!(fit.s_hat, 0.0);
        assert_eq!(fit.t1_hat, fit.t0_hat);
        assert_eq!(fit.h1, fit.h0);

        let s2 = sample(&[1.0, 2.0], &[1.0, 3.0]);
        let fit2 = lr_statistic(&s2).unwrap();
        assert!(fit2.atom);
        assert_eq!(fit2.t_stat, 0.0);
    }

    #[test]
    fn lr_statistic_positive_case() {
        let s = sample(&[1.0, 2.0], &[1.0, 1.0]);
        let fit = lr_statistic(&s).unwrap();
        assert!(!fit.atom);
        assert!(fit.t_stat > 0.0);
        assert_relative_eq!(fit.t_stat, 2.0 * (fit.h1 - fit.h0), max_relative = 1e-15);
        let h0 = loglike(&s, 0.0, fit.t0_hat).unwrap();
        assert_relative_eq!(fit.h0, h0, max_relative = 1e-15);
        assert!(fit.h1 >= fit.h0);
        assert_relative_eq!(fit.h1, -2.0, max_relative = 1e-12);
    }

    #[test]
    fn brent_recovers_quadratic_maximum() {
        let f = |y: f64| -(y - 0.737).powi(2);
        let (y, fy) = brent_max(f, 0.0, 10.0, 1e-14, 1e-18).unwrap();
        assert_relative_eq!(y, 0.737, max_relative = 1e-10);
        assert!(fy.abs() < 1e-18);
    }

    #[test]
    fn brent_handles_boundary_adjacent_maximum() {
        let f = |y: f64| -(y - 1e-6).powi(2);
        let (y, _) = brent_max(f, 0.0, 10.0, 1e-14, 1e-18).unwrap();
        assert_relative_eq!(y, 1e-6, max_relative = 1e-6);
    }

    fn random_instance(
        n: usize,
        seed: u64,
    ) -> (Vec<f64>, Vec<f64>) {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut kappas: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..4.0)).collect();
        kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..5.0)).collect();
        (kappas, xs)
    }

    #[test]
    fn h1_never_below_h0_on_random_instances() {
        for seed in 0..200u64 {
            let (kappas, xs) = random_instance(2 + (seed % 11) as usize, seed);
            let s = sample(&kappas, &xs);
            let (_, h0) = mle_h0(&s).unwrap();
            let (_, _, h1) = mle_full(&s).unwrap();
            assert!(h1 >= h0 - 1e-12, "seed {seed}: h1 = {h1} < h0 = {h0}");
            let fit = lr_statistic(&s).unwrap();
            assert!(fit.t_stat >= 0.0);
            assert_eq!(fit.atom, fit.t_stat <= ATOM_THRESHOLD);
        }
    }

    #[test]
    fn statistic_is_scale_invariant() {
        for seed in 0..1000u64 {
            let (kappas, xs) = random_instance(3 + (seed % 9) as usize, 1000 + seed);
            let s = sample(&kappas, &xs);
            let base = lr_statistic(&s).unwrap();
            for r in [1e-3, 1e3] {
                let scaled_xs: Vec<f64> = xs.iter().map(|x| x * r).collect();
                let scaled = sample(&kappas, &scaled_xs);
                let got = lr_statistic(&scaled).unwrap();
                assert!(
                    (got.t_stat - base.t_stat).abs() < 1e-9,
                    "seed {seed} r {r}: {} vs {}",
                    got.t_stat,
                    base.t_stat
                );
            }
        }
    }

    #[test]
    fn argmax_is_scale_equivariant() {
        for seed in 0..1000u64 {
            let (kappas, xs) = random_instance(3 + (seed % 9) as usize, 2000 + seed);
            let s = sample(&kappas, &xs);
            let (s_hat, t1, _) = mle_full(&s).unwrap();
            let r = 37.5;
            let scaled_xs: Vec<f64> = xs.iter().map(|x| x * r).collect();
            let scaled = sample(&kappas, &scaled_xs);
            let (s_r, t_r, _) = mle_full(&scaled).unwrap();
            let scale = (s_hat * r).abs().max((t1 * r).abs()).max(1e-300);
            assert!(
                (s_r - s_hat * r).abs() <= 1e-8 * scale,
                "seed {seed}: s {} vs {}",
                s_r,
                s_hat * r
            );
            assert!(
                (t_r - t1 * r).abs() <= 1e-8 * scale,
                "seed {seed}: t {} vs {}",
                t_r,
                t1 * r
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_fit_invariants(
            n in 2usize..10,
            seed in 0u64..10_000,
            r in prop::sample::select(vec![1e-3f64, 0.1, 1.0, 10.0, 1e3]),
        ) {
            let (kappas, xs) = random_instance(n, seed);
            let s = sample(&kappas, &xs);
            let fit = lr_statistic(&s).unwrap();
            prop_assert!(fit.h1 >= fit.h0 - 1e-12);
            prop_assert!(fit.t_stat >= 0.0);
            prop_assert!(fit.s_hat >= 0.0);
            prop_assert_eq!(fit.atom, fit.t_stat <= ATOM_THRESHOLD);

            let scaled_xs: Vec<f64> = xs.iter().map(|x| x * r).collect();
            let scaled = sample(&kappas, &scaled_xs);
            let fit_r = lr_statistic(&scaled).unwrap();
            prop_assert!((fit_r.t_stat - fit.t_stat).abs() < 1e-9);
        }
    }
}
