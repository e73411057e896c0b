/* C ABI for the chicrit decorrelation-criterion library. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
typedef enum ChiStatus {
  CHI_STATUS_OK = 0,
  CHI_STATUS_NULL_POINTER = 1,
  CHI_STATUS_INVALID_ARGUMENT = 2,
  CHI_STATUS_IO_ERROR = 3,
  CHI_STATUS_PARSE_ERROR = 4,
  CHI_STATUS_DATA_ERROR = 5,
  CHI_STATUS_FIT_ERROR = 6,
  CHI_STATUS_PANIC = 7,
} ChiStatus;

// Which plateau bound of the auto-MI first minimum becomes tau.
typedef enum ChiTauPolicy {
  CHI_TAU_POLICY_PLATEAU_START = 0,
  CHI_TAU_POLICY_PLATEAU_END = 1,
  CHI_TAU_POLICY_PLATEAU_MID = 2,
} ChiTauPolicy;

// Pixel separation computation.
typedef enum ChiDistanceMode {
  CHI_DISTANCE_MODE_HAVERSINE = 0,
  CHI_DISTANCE_MODE_PLANAR = 1,
} ChiDistanceMode;

// Recommendation decoded from the chi value.
typedef enum ChiClassification {
  CHI_CLASSIFICATION_STOCHASTIC = 0,
  CHI_CLASSIFICATION_NWP = 1,
  CHI_CLASSIFICATION_INDETERMINATE = 2,
  CHI_CLASSIFICATION_CLASSIFY_ERROR = -1,
} ChiClassification;

// Opaque handle over a loaded geometry + series dataset.
typedef struct ChiDataset ChiDataset;

// Knobs of [`chi_dataset_analyze`]. Obtain defaults from
// [`chi_analyze_options_default`] and override fields as needed.
typedef struct ChiAnalyzeOptions {
  // Forecast horizon in time steps; tau is divided by it.
  uint32_t horizon_steps;
  // Classification band: below low is stochastic, above high is NWP.
  double chi_low;
  double chi_high;
  // Histogram bins: 0 = Sturges rule, 1 = Freedman-Diaconis, n >= 2 = fixed n.
  uint32_t bins;
  // Maximum auto-MI lag in time steps.
  uint32_t max_lag;
  // Minimum-detection tolerance in bits.
  double tau_tol;
  enum ChiTauPolicy tau_policy;
  enum ChiDistanceMode distance_mode;
  // Minimum co-present samples per pixel pair and per lag.
  uint32_t sample_floor;
  // Pixel pairs to sample (0 = all pairs).
  uint64_t sampling_m;
  // Seed for pair subsampling.
  uint64_t seed;
} ChiAnalyzeOptions;

// Mutual information estimate plus its surrounding entropies, in bits.
typedef struct ChiMiResult {
  double mi_bits;
  double h_x_bits;
  double h_y_bits;
  double h_x_given_y_bits;
  // MI / H(X), in [0, 1].
  double nmi;
  uint64_t n_used;
  uint64_t n_dropped;
} ChiMiResult;

// Parameters of the fitted a*exp(-d/b) + c decay.
typedef struct ChiExpDecayFit {
  double a;
  // Decay length; equals the extracted decorrelation distance.
  double b;
  double c;
  double rss;
  uint64_t iterations;
  // Nonzero when the fit converged.
  int32_t converged;
} ChiExpDecayFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *chi_version(void);

// Detail message of the most recent failure on this thread. The pointer
// stays valid until the next failing call on the same thread.
const char *chi_last_error(void);

// Load a geometry CSV and a series CSV into a dataset handle.
// `spacing_km <= 0` infers the grid spacing from the minimum pair distance.
// The handle must be released with [`chi_dataset_free`].
//
// # Safety
// `geometry_path` and `series_path` must be NUL-terminated strings and
// `out_dataset` a valid pointer.
enum ChiStatus chi_dataset_load(const char *geometry_path,
                                const char *series_path,
                                double spacing_km,
                                struct ChiDataset **out_dataset);

// Release a dataset handle. Accepts null.
//
// # Safety
// `dataset` must be null or a pointer obtained from this library.
void chi_dataset_free(struct ChiDataset *dataset);

// Number of pixels carrying a series; 0 for a null handle.
//
// # Safety
// `dataset` must be null or a valid handle.
size_t chi_dataset_pixel_count(const struct ChiDataset *dataset);

// Number of time steps on the shared axis; 0 for a null handle.
//
// # Safety
// `dataset` must be null or a valid handle.
size_t chi_dataset_step_count(const struct ChiDataset *dataset);

// Produce a new handle holding only samples whose local hour lies in the
// inclusive [start_hour, end_hour] window.
//
// # Safety
// `dataset` and `out_dataset` must be valid pointers.
enum ChiStatus chi_dataset_filter_day_hours(const struct ChiDataset *dataset,
                                            uint8_t start_hour,
                                            uint8_t end_hour,
                                            int32_t utc_offset_hours,
                                            struct ChiDataset **out_dataset);

// Defaults: horizon 1, band [0.9, 1.1], Sturges bins, max lag 24,
// tolerance 0.005 bits, plateau end, haversine distances, floor 100,
// all pairs.
struct ChiAnalyzeOptions chi_analyze_options_default(void);

// Run the full analysis and hand back the report as a JSON string, to be
// released with [`chi_string_free`].
//
// # Safety
// All pointers must be valid; `options` may be null for defaults.
enum ChiStatus chi_dataset_analyze(const struct ChiDataset *dataset,
                                   const struct ChiAnalyzeOptions *options,
                                   char **out_report_json);

// Release a string returned by this library. Accepts null.
//
// # Safety
// `s` must be null or a pointer returned by this library.
void chi_string_free(char *s);

// Normalized mutual information between two equally long samples.
// NaN entries are removed pairwise. `bins` follows the options convention.
//
// # Safety
// `x` and `y` must point to `len` doubles; `out` must be valid.
enum ChiStatus chi_normalized_mi(const double *x,
                                 const double *y,
                                 size_t len,
                                 uint32_t bins,
                                 struct ChiMiResult *out);

// Closed-form Gaussian mutual information in bits for |rho| < 1.
//
// # Safety
// `out` must be a valid pointer.
enum ChiStatus chi_analytic_gaussian_mi(double rho, double *out);

// Weighted-equal least-squares fit of nmi = a*exp(-d/b) + c over the given
// (distance, nmi) samples.
//
// # Safety
// `distances` and `nmi` must point to `len` doubles; `out` must be valid.
enum ChiStatus chi_fit_exp_decay(const double *distances,
                                 const double *nmi,
                                 size_t len,
                                 struct ChiExpDecayFit *out);

// chi = delta_pixels / tau_eff; both inputs must be strictly positive.
//
// # Safety
// `out` must be a valid pointer.
enum ChiStatus chi_value(double delta_pixels, double tau_eff, double *out);

// Classify a chi value against the [low, high] band.
enum ChiClassification chi_classify(double chi, double low, double high);

// tau divided by the horizon length in steps.
//
// # Safety
// `out` must be a valid pointer.
enum ChiStatus chi_effective_tau(double tau, uint32_t horizon_steps, double *out);

// Normalized mean bias error in percent; NaN pairs are deleted.
//
// # Safety
// `est` and `meas` must point to `len` doubles; `out` must be valid.
enum ChiStatus chi_nmbe(const double *est, const double *meas, size_t len, double *out);

// Normalized root mean square error in percent; NaN pairs are deleted.
//
// # Safety
// `est` and `meas` must point to `len` doubles; `out` must be valid.
enum ChiStatus chi_nrmse(const double *est, const double *meas, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
