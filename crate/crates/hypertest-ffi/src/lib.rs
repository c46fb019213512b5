//! C ABI for the hyperuniformity test pipeline.
//!
//! Every object crossing the boundary is either a plain value struct or an
//! opaque handle allocated by this library and released by the matching
//! `*_free` call. Functions that can fail return [`ht_status`]; on any value
//! other than `HT_OK` a human-readable message is available from
//! [`ht_last_error`] until the next failing call on the same thread.
//! Handles are immutable after creation, so sharing a `const` handle across
//! threads is safe; creation and destruction belong to one owner.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hypertest::calibrate::read_null_model;
use hypertest::pattern::{read_pattern_path, wrap_coord, PointPattern};
use hypertest::spectral::read_sample_path;
use hypertest::{
    build_wave_grid, critical_value, lr_statistic, p_value, simulate, spectral_sample, Model,
    ModelConfig, NullModel, SampleMeta, SpectralSample, WaveGrid,
};

/// Outcome of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ht_status {
    /// Success.
    HT_OK = 0,
    /// Rejected input: bad configuration, file contents, or path.
    HT_USAGE_ERROR = 1,
    /// Numerical or stochastic failure inside the pipeline.
    HT_NUMERIC_ERROR = 2,
    /// Null pointer, invalid UTF-8, or an out-of-range index at the ABI.
    HT_INVALID_ARGUMENT = 3,
}

/// The five built-in point-process models.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ht_model {
    HT_MODEL_POISSON = 0,
    HT_MODEL_THOMAS = 1,
    HT_MODEL_RSA = 2,
    HT_MODEL_URL = 3,
    HT_MODEL_MATCHING = 4,
}

/// Simulation request. Obtain defaults from [`ht_sim_config_default`] and
/// override fields as needed; fields irrelevant to the model are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ht_sim_config {
    pub model: ht_model,
    /// Spatial dimension, 1 to 3.
    pub dim: u32,
    /// Side length of the periodic box.
    pub box_length: f64,
    /// Expected points per unit volume.
    pub target_intensity: f64,
    /// Thomas: mean children per cluster.
    pub mean_cluster_size: f64,
    /// Thomas: standard deviation of the child displacement.
    pub cluster_std: f64,
    /// RSA: sphere count; negative derives it from the intensity.
    pub rsa_count: i64,
    /// RSA: target volume fraction; non-positive selects the default.
    pub volume_fraction: f64,
    /// RSA: attempt budget per pattern as a multiple of the count.
    pub rsa_attempt_factor: u64,
    /// Matching: intensity of the Poisson partner process, above 1.
    pub alpha: f64,
    /// Retention probability of a final independent thinning; 1 disables.
    pub thin: f64,
}

/// Both maximum-likelihood fits of one spectral sample and the
/// likelihood-ratio statistic comparing them.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ht_fit_result {
    /// Slope of the constrained fit through the origin.
    pub t0_hat: f64,
    /// Log-likelihood of the constrained fit.
    pub h0: f64,
    /// Intercept of the unconstrained fit; zero exactly when `atom` is set.
    pub s_hat: f64,
    /// Slope of the unconstrained fit.
    pub t1_hat: f64,
    /// Log-likelihood of the unconstrained fit.
    pub h1: f64,
    /// Likelihood-ratio statistic `2*(h1 - h0)`.
    pub t_stat: f64,
    /// True when the unconstrained maximizer sits on the boundary.
    pub atom: bool,
}

/// Opaque periodic point pattern.
pub struct ht_pattern(PointPattern);

/// Opaque set of admissible wave vectors.
pub struct ht_grid(WaveGrid);

/// Opaque spectral sample of `(kappa, intensity)` pairs.
pub struct ht_sample(SpectralSample);

/// Opaque calibrated null distribution of the test statistic.
pub struct ht_null(NullModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl std::fmt::Display) {
    let c = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: hypertest::Error) -> ht_status {
    let status = match e.exit_code() {
        1 => ht_status::HT_USAGE_ERROR,
        _ => ht_status::HT_NUMERIC_ERROR,
    };
    set_error(e);
    status
}

fn invalid(msg: &str) -> ht_status {
    set_error(msg);
    ht_status::HT_INVALID_ARGUMENT
}

/// Runs `f` with panics converted to `HT_NUMERIC_ERROR`, so unwinding never
/// crosses the ABI.
fn guarded(f: impl FnOnce() -> ht_status) -> ht_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ht_status::HT_NUMERIC_ERROR
        }
    }
}

/// Converts a required C string argument, rejecting null and invalid UTF-8.
unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, ht_status> {
    if ptr.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not valid UTF-8")))
}

/// Stores `value` boxed behind `out`, rejecting a null `out`.
unsafe fn emit<T>(out: *mut *mut T, value: T) -> ht_status {
    if out.is_null() {
        return invalid("out is null");
    }
    *out = Box::into_raw(Box::new(value));
    ht_status::HT_OK
}

unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, ht_status> {
    ptr.as_ref().ok_or_else(|| invalid(&format!("{name} is null")))
}

fn model_of(m: ht_model) -> Model {
    match m {
        ht_model::HT_MODEL_POISSON => Model::Poisson,
        ht_model::HT_MODEL_THOMAS => Model::Thomas,
        ht_model::HT_MODEL_RSA => Model::Rsa,
        ht_model::HT_MODEL_URL => Model::Url,
        ht_model::HT_MODEL_MATCHING => Model::Matching,
    }
}

fn to_model_config(c: &ht_sim_config) -> ModelConfig {
    let mut cfg = ModelConfig::new(model_of(c.model), c.dim as usize, c.box_length);
    cfg.target_intensity = c.target_intensity;
    cfg.mean_cluster_size = c.mean_cluster_size;
    cfg.cluster_std = c.cluster_std;
    cfg.rsa_count = usize::try_from(c.rsa_count).ok();
    cfg.volume_fraction = (c.volume_fraction > 0.0).then_some(c.volume_fraction);
    cfg.rsa_attempt_factor = c.rsa_attempt_factor;
    cfg.alpha = c.alpha;
    cfg.thin = c.thin;
    cfg
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ht_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn ht_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a pattern from `n_coords / dim` points stored row-major in
/// `coords`. Coordinates are wrapped into the box, so any finite values are
/// accepted.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_new(
    dim: u32,
    box_length: f64,
    coords: *const f64,
    n_coords: usize,
    out: *mut *mut ht_pattern,
) -> ht_status {
    guarded(|| {
        if coords.is_null() && n_coords > 0 {
            return invalid("coords is null");
        }
        let mut data = if n_coords == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(coords, n_coords).to_vec()
        };
        if box_length > 0.0 {
            for c in &mut data {
                if c.is_finite() {
                    *c = wrap_coord(*c, box_length);
                }
            }
        }
        match PointPattern::new(dim as usize, box_length, data) {
            Ok(p) => emit(out, ht_pattern(p)),
            Err(e) => fail(e),
        }
    })
}

/// Reads a pattern from a whitespace-separated text file.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_read(
    path: *const c_char,
    out: *mut *mut ht_pattern,
) -> ht_status {
    guarded(|| {
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match read_pattern_path(path) {
            Ok(p) => emit(out, ht_pattern(p)),
            Err(e) => fail(e),
        }
    })
}

/// Simulates one replicate of the configured model. Replicate `replicate`
/// under `seed` always yields the same pattern.
#[no_mangle]
pub unsafe extern "C" fn ht_simulate(
    config: *const ht_sim_config,
    seed: u64,
    replicate: u64,
    out: *mut *mut ht_pattern,
) -> ht_status {
    guarded(|| {
        let config = match deref(config, "config") {
            Ok(c) => c,
            Err(s) => return s,
        };
        match simulate(&to_model_config(config), seed, replicate) {
            Ok(p) => emit(out, ht_pattern(p)),
            Err(e) => fail(e),
        }
    })
}

/// Default configuration for `model` in a `dim`-dimensional box.
#[no_mangle]
pub extern "C" fn ht_sim_config_default(
    model: ht_model,
    dim: u32,
    box_length: f64,
) -> ht_sim_config {
    let cfg = ModelConfig::new(model_of(model), dim as usize, box_length);
    ht_sim_config {
        model,
        dim,
        box_length,
        target_intensity: cfg.target_intensity,
        mean_cluster_size: cfg.mean_cluster_size,
        cluster_std: cfg.cluster_std,
        rsa_count: -1,
        volume_fraction: 0.0,
        rsa_attempt_factor: cfg.rsa_attempt_factor,
        alpha: cfg.alpha,
        thin: cfg.thin,
    }
}

/// Number of points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_len(pattern: *const ht_pattern) -> usize {
    pattern.as_ref().map_or(0, |p| p.0.len())
}

/// Spatial dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_dim(pattern: *const ht_pattern) -> u32 {
    pattern.as_ref().map_or(0, |p| p.0.dim() as u32)
}

/// Box side length, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_box_length(pattern: *const ht_pattern) -> f64 {
    pattern.as_ref().map_or(0.0, |p| p.0.box_length())
}

/// Exposes the row-major coordinate buffer. The pointer stays valid while
/// the pattern is alive; `*n_coords` receives `len * dim`.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_coords(
    pattern: *const ht_pattern,
    coords: *mut *const f64,
    n_coords: *mut usize,
) -> ht_status {
    guarded(|| {
        let pattern = match deref(pattern, "pattern") {
            Ok(p) => p,
            Err(s) => return s,
        };
        if coords.is_null() || n_coords.is_null() {
            return invalid("output pointer is null");
        }
        *coords = pattern.0.coords().as_ptr();
        *n_coords = pattern.0.coords().len();
        ht_status::HT_OK
    })
}

/// Releases a pattern handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ht_pattern_free(pattern: *mut ht_pattern) {
    if !pattern.is_null() {
        drop(Box::from_raw(pattern));
    }
}

/// Builds the admissible wave-vector set for a `dim`-dimensional box of
/// side `box_length` with norm cutoff `cutoff`.
#[no_mangle]
pub unsafe extern "C" fn ht_grid_build(
    dim: u32,
    box_length: f64,
    cutoff: f64,
    out: *mut *mut ht_grid,
) -> ht_status {
    guarded(|| match build_wave_grid(dim as usize, box_length, cutoff) {
        Ok(g) => emit(out, ht_grid(g)),
        Err(e) => fail(e),
    })
}

/// Number of wave vectors, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_grid_len(grid: *const ht_grid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Releases a grid handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ht_grid_free(grid: *mut ht_grid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Evaluates the scattering intensity of `pattern` at every grid vector.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_compute(
    pattern: *const ht_pattern,
    grid: *const ht_grid,
    out: *mut *mut ht_sample,
) -> ht_status {
    guarded(|| {
        let pattern = match deref(pattern, "pattern") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let grid = match deref(grid, "grid") {
            Ok(g) => g,
            Err(s) => return s,
        };
        match spectral_sample(&pattern.0, &grid.0) {
            Ok(s) => emit(out, ht_sample(s)),
            Err(e) => fail(e),
        }
    })
}

/// Builds a sample directly from `n` parallel arrays of squared wave norms
/// and intensities.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_new(
    kappas: *const f64,
    xs: *const f64,
    n: usize,
    out: *mut *mut ht_sample,
) -> ht_status {
    guarded(|| {
        if n > 0 && (kappas.is_null() || xs.is_null()) {
            return invalid("kappas or xs is null");
        }
        let entries = (0..n)
            .map(|i| (*kappas.add(i), *xs.add(i)))
            .collect::<Vec<_>>();
        match SpectralSample::new(entries, SampleMeta::unknown()) {
            Ok(s) => emit(out, ht_sample(s)),
            Err(e) => fail(e),
        }
    })
}

/// Reads a sample from a `kappa,x` CSV file.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_read(
    path: *const c_char,
    out: *mut *mut ht_sample,
) -> ht_status {
    guarded(|| {
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match read_sample_path(path) {
            Ok(s) => emit(out, ht_sample(s)),
            Err(e) => fail(e),
        }
    })
}

/// Number of sample entries, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_len(sample: *const ht_sample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// Copies entry `index` into `*kappa` and `*x`.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_entry(
    sample: *const ht_sample,
    index: usize,
    kappa: *mut f64,
    x: *mut f64,
) -> ht_status {
    guarded(|| {
        let sample = match deref(sample, "sample") {
            Ok(s) => s,
            Err(s) => return s,
        };
        if kappa.is_null() || x.is_null() {
            return invalid("output pointer is null");
        }
        match sample.0.entries().get(index) {
            Some(&(k, v)) => {
                *kappa = k;
                *x = v;
                ht_status::HT_OK
            }
            None => invalid("index out of range"),
        }
    })
}

/// Releases a sample handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ht_sample_free(sample: *mut ht_sample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Fits both structure-factor models to `sample` and fills `*out` with the
/// estimates and the likelihood-ratio statistic.
#[no_mangle]
pub unsafe extern "C" fn ht_fit(sample: *const ht_sample, out: *mut ht_fit_result) -> ht_status {
    guarded(|| {
        let sample = match deref(sample, "sample") {
            Ok(s) => s,
            Err(s) => return s,
        };
        if out.is_null() {
            return invalid("out is null");
        }
        match lr_statistic(&sample.0) {
            Ok(fit) => {
                *out = ht_fit_result {
                    t0_hat: fit.t0_hat,
                    h0: fit.h0,
                    s_hat: fit.s_hat,
                    t1_hat: fit.t1_hat,
                    h1: fit.h1,
                    t_stat: fit.t_stat,
                    atom: fit.atom,
                };
                ht_status::HT_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// The built-in null distribution calibrated for two-dimensional boxes at
/// the default cutoff.
#[no_mangle]
pub unsafe extern "C" fn ht_null_builtin(out: *mut *mut ht_null) -> ht_status {
    guarded(|| emit(out, ht_null(NullModel::builtin())))
}

/// Reads a calibrated null distribution from a JSON file.
#[no_mangle]
pub unsafe extern "C" fn ht_null_read(path: *const c_char, out: *mut *mut ht_null) -> ht_status {
    guarded(|| {
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match read_null_model(path) {
            Ok(n) => emit(out, ht_null(n)),
            Err(e) => fail(e),
        }
    })
}

/// Probability mass at zero, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_null_p0(null: *const ht_null) -> f64 {
    null.as_ref().map_or(0.0, |n| n.0.p0)
}

/// Degrees of freedom of the continuous component, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn ht_null_dof(null: *const ht_null) -> f64 {
    null.as_ref().map_or(0.0, |n| n.0.dof)
}

/// p-value of the statistic `t_stat` under `null`.
#[no_mangle]
pub unsafe extern "C" fn ht_p_value(
    t_stat: f64,
    null: *const ht_null,
    out: *mut f64,
) -> ht_status {
    guarded(|| {
        let null = match deref(null, "null model") {
            Ok(n) => n,
            Err(s) => return s,
        };
        if out.is_null() {
            return invalid("out is null");
        }
        match p_value(t_stat, &null.0) {
            Ok(p) => {
                *out = p;
                ht_status::HT_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Rejection threshold of the level-`level` test under `null`.
#[no_mangle]
pub unsafe extern "C" fn ht_critical_value(
    null: *const ht_null,
    level: f64,
    out: *mut f64,
) -> ht_status {
    guarded(|| {
        let null = match deref(null, "null model") {
            Ok(n) => n,
            Err(s) => return s,
        };
        if out.is_null() {
            return invalid("out is null");
        }
        match critical_value(&null.0, level) {
            Ok(c) => {
                *out = c;
                ht_status::HT_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a null-model handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ht_null_free(null: *mut ht_null) {
    if !null.is_null() {
        drop(Box::from_raw(null));
    }
}
