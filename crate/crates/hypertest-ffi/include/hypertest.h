#ifndef HYPERTEST_H
#define HYPERTEST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a fallible call.
 */
typedef enum ht_status {
  /**
   * Success.
   */
  HT_OK = 0,
  /**
   * Rejected input: bad configuration, file contents, or path.
   */
  HT_USAGE_ERROR = 1,
  /**
   * Numerical or stochastic failure inside the pipeline.
   */
  HT_NUMERIC_ERROR = 2,
  /**
   * Null pointer, invalid UTF-8, or an out-of-range index at the ABI.
   */
  HT_INVALID_ARGUMENT = 3,
} ht_status;

/**
 * The five built-in point-process models.
 */
typedef enum ht_model {
  HT_MODEL_POISSON = 0,
  HT_MODEL_THOMAS = 1,
  HT_MODEL_RSA = 2,
  HT_MODEL_URL = 3,
  HT_MODEL_MATCHING = 4,
} ht_model;

/**
 * Opaque set of admissible wave vectors.
 */
typedef struct ht_grid ht_grid;

/**
 * Opaque calibrated null distribution of the test statistic.
 */
typedef struct ht_null ht_null;

/**
 * Opaque periodic point pattern.
 */
typedef struct ht_pattern ht_pattern;

/**
 * Opaque spectral sample of `(kappa, intensity)` pairs.
 */
typedef struct ht_sample ht_sample;

/**
 * Simulation request. Obtain defaults from [`ht_sim_config_default`] and
 * override fields as needed; fields irrelevant to the model are ignored.
 */
typedef struct ht_sim_config {
  enum ht_model model;
  /**
   * Spatial dimension, 1 to 3.
   */
  uint32_t dim;
  /**
   * Side length of the periodic box.
   */
  double box_length;
  /**
   * Expected points per unit volume.
   */
  double target_intensity;
  /**
   * Thomas: mean children per cluster.
   */
  double mean_cluster_size;
  /**
   * Thomas: standard deviation of the child displacement.
   */
  double cluster_std;
  /**
   * RSA: sphere count; negative derives it from the intensity.
   */
  int64_t rsa_count;
  /**
   * RSA: target volume fraction; non-positive selects the default.
   */
  double volume_fraction;
  /**
   * RSA: attempt budget per pattern as a multiple of the count.
   */
  uint64_t rsa_attempt_factor;
  /**
   * Matching: intensity of the Poisson partner process, above 1.
   */
  double alpha;
  /**
   * Retention probability of a final independent thinning; 1 disables.
   */
  double thin;
} ht_sim_config;

/**
 * Both maximum-likelihood fits of one spectral sample and the
 * likelihood-ratio statistic comparing them.
 */
typedef struct ht_fit_result {
  /**
   * Slope of the constrained fit through the origin.
   */
  double t0_hat;
  /**
   * Log-likelihood of the constrained fit.
   */
  double h0;
  /**
   * Intercept of the unconstrained fit; zero exactly when `atom` is set.
   */
  double s_hat;
  /**
   * Slope of the unconstrained fit.
   */
  double t1_hat;
  /**
   * Log-likelihood of the unconstrained fit.
   */
  double h1;
  /**
   * Likelihood-ratio statistic `2*(h1 - h0)`.
   */
  double t_stat;
  /**
   * True when the unconstrained maximizer sits on the boundary.
   */
  bool atom;
} ht_fit_result;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ht_version(void);

/**
 * Message describing the most recent failure on this thread, or an empty
 * string. The pointer stays valid until the next failing call on the same
 * thread.
 */
const char *ht_last_error(void);

/**
 * Builds a pattern from `n_coords / dim` points stored row-major in
 * `coords`. Coordinates are wrapped into the box, so any finite values are
 * accepted.
 */
enum ht_status ht_pattern_new(uint32_t dim,
                              double box_length,
                              const double *coords,
                              uintptr_t n_coords,
                              struct ht_pattern **out);

/**
 * Reads a pattern from a whitespace-separated text file.
 */
enum ht_status ht_pattern_read(const char *path, struct ht_pattern **out);

/**
 * Simulates one replicate of the configured model. Replicate `replicate`
 * under `seed` always yields the same pattern.
 */
enum ht_status ht_simulate(const struct ht_sim_config *config,
                           uint64_t seed,
                           uint64_t replicate,
                           struct ht_pattern **out);

/**
 * Default configuration for `model` in a `dim`-dimensional box.
 */
struct ht_sim_config ht_sim_config_default(enum ht_model model, uint32_t dim, double box_length);

/**
 * Number of points, or 0 for a null handle.
 */
uintptr_t ht_pattern_len(const struct ht_pattern *pattern);

/**
 * Spatial dimension, or 0 for a null handle.
 */
uint32_t ht_pattern_dim(const struct ht_pattern *pattern);

/**
 * Box side length, or 0 for a null handle.
 */
double ht_pattern_box_length(const struct ht_pattern *pattern);

/**
 * Exposes the row-major coordinate buffer. The pointer stays valid while
 * the pattern is alive; `*n_coords` receives `len * dim`.
 */
enum ht_status ht_pattern_coords(const struct ht_pattern *pattern,
                                 const double **coords,
                                 uintptr_t *n_coords);

/**
 * Releases a pattern handle. Null is a no-op.
 */
void ht_pattern_free(struct ht_pattern *pattern);

/**
 * Builds the admissible wave-vector set for a `dim`-dimensional box of
 * side `box_length` with norm cutoff `cutoff`.
 */
enum ht_status ht_grid_build(uint32_t dim, double box_length, double cutoff, struct ht_grid **out);

/**
 * Number of wave vectors, or 0 for a null handle.
 */
uintptr_t ht_grid_len(const struct ht_grid *grid);

/**
 * Releases a grid handle. Null is a no-op.
 */
void ht_grid_free(struct ht_grid *grid);

/**
 * Evaluates the scattering intensity of `pattern` at every grid vector.
 */
enum ht_status ht_sample_compute(const struct ht_pattern *pattern,
                                 const struct ht_grid *grid,
                                 struct ht_sample **out);

/**
 * Builds a sample directly from `n` parallel arrays of squared wave norms
 * and intensities.
 */
enum ht_status ht_sample_new(const double *kappas,
                             const double *xs,
                             uintptr_t n,
                             struct ht_sample **out);

/**
 * Reads a sample from a `kappa,x` CSV file.
 */
enum ht_status ht_sample_read(const char *path, struct ht_sample **out);

/**
 * Number of sample entries, or 0 for a null handle.
 */
uintptr_t ht_sample_len(const struct ht_sample *sample);

/**
 * Copies entry `index` into `*kappa` and `*x`.
 */
enum ht_status ht_sample_entry(const struct ht_sample *sample,
                               uintptr_t index,
                               double *kappa,
                               double *x);

/**
 * Releases a sample handle. Null is a no-op.
 */
void ht_sample_free(struct ht_sample *sample);

/**
 * Fits both structure-factor models to `sample` and fills `*out` with the
 * estimates and the likelihood-ratio statistic.
 */
enum ht_status ht_fit(const struct ht_sample *sample, struct ht_fit_result *out);

/**
 * The built-in null distribution calibrated for two-dimensional boxes at
 * the default cutoff.
 */
enum ht_status ht_null_builtin(struct ht_null **out);

/**
 * Reads a calibrated null distribution from a JSON file.
 */
enum ht_status ht_null_read(const char *path, struct ht_null **out);

/**
 * Probability mass at zero, or 0 for a null handle.
 */
double ht_null_p0(const struct ht_null *null);

/**
 * Degrees of freedom of the continuous component, or 0 for a null handle.
 */
double ht_null_dof(const struct ht_null *null);

/**
 * p-value of the statistic `t_stat` under `null`.
 */
enum ht_status ht_p_value(double t_stat, const struct ht_null *null, double *out);

/**
 * Rejection threshold of the level-`level` test under `null`.
 */
enum ht_status ht_critical_value(const struct ht_null *null, double level, double *out);

/**
 * Releases a null-model handle. Null is a no-op.
 */
void ht_null_free(struct ht_null *null);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERTEST_H */
