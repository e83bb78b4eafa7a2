/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef MONOSYNC_H
#define MONOSYNC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsCurvature {
  MS_CURVATURE_CONVEX = 1,
  MS_CURVATURE_CONCAVE = -1,
  MS_CURVATURE_AFFINE = 0,
} MsCurvature;

typedef enum MsExtremum {
  MS_EXTREMUM_MIN = -1,
  MS_EXTREMUM_MAX = 1,
} MsExtremum;

typedef enum MsMonotonicity {
  MS_MONOTONICITY_INCREASING = 1,
  MS_MONOTONICITY_DECREASING = -1,
} MsMonotonicity;

// Result of every fallible call.
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  MS_STATUS_NOT_MONOTONE = 3,
  MS_STATUS_MIXED_CURVATURE = 4,
  MS_STATUS_DIMENSION_MISMATCH = 5,
  MS_STATUS_EMPTY_DECOMPOSITION = 6,
  MS_STATUS_SYNCHRONIZED_PAIR = 7,
  MS_STATUS_NUMERICAL_DIVERGENCE = 8,
  MS_STATUS_BUFFER_TOO_SMALL = 9,
  MS_STATUS_OUT_OF_RANGE = 10,
  MS_STATUS_PANIC = 11,
} MsStatus;

typedef enum MsTerminal {
  MS_TERMINAL_HORIZON = 0,
  MS_TERMINAL_FULL_SYNC = 1,
  MS_TERMINAL_SPLAY_CONVERGED = 2,
} MsTerminal;

// Opaque coupling function.
typedef struct MsCoupling MsCoupling;

// Opaque model: coupling, natural frequency and population size.
typedef struct MsModel MsModel;

// Opaque simulation result.
typedef struct MsTrajectory MsTrajectory;

// Integrator settings for `ms_simulate`.
typedef struct MsSimOptions {
  double dt;
  double t_end;
  double sync_eps;
  size_t record_every;
  double splay_tol;
} MsSimOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *ms_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ms_version(void);

// Γ(θ) = s·(a + e^{−θ})/n with s = ±1, a > 0, n ≥ 2.
enum MsStatus ms_coupling_expfam(int32_t s, double a, size_t n, struct MsCoupling **out);

// Γ(θ) = slope·θ + intercept on (0, 2π).
enum MsStatus ms_coupling_affine(double slope, double intercept, struct MsCoupling **out);

// Piecewise-linear coupling through `len` knots (`theta[i]`, `value[i]`),
// with `theta` strictly increasing inside (0, 2π).
enum MsStatus ms_coupling_tabulated(const double *theta,
                                    const double *value,
                                    size_t len,
                                    struct MsCoupling **out);

// Overrides Γ(0).
enum MsStatus ms_coupling_set_value_at_zero(struct MsCoupling *g, double value);

// Releases a coupling. NULL is ignored.
void ms_coupling_free(struct MsCoupling *g);

// Γ(x) for any finite x.
enum MsStatus ms_coupling_eval(const struct MsCoupling *g, double x, double *out);

// Monotonicity and curvature class on a uniform grid of `n_samples` points
// (0 selects the default).
enum MsStatus ms_coupling_classify(const struct MsCoupling *g,
                                   size_t n_samples,
                                   enum MsMonotonicity *monotonicity,
                                   enum MsCurvature *curvature);

// Total-variation distance between two reduced states of length `len`.
enum MsStatus ms_tv_distance(const double *x, const double *y, size_t len, double *out);

// Critical decomposition of a difference vector `d` of length `len`.
//
// Writes the 1-based critical indices and their kinds into buffers of
// capacity `cap`, the count into `n_critical` and the alternating sum into
// `alternating_sum`. When `cap` is too small the count is still written
// and `MsStatus::BufferTooSmall` is returned.
enum MsStatus ms_decompose(const double *d,
                           size_t len,
                           size_t *indices,
                           enum MsExtremum *kinds,
                           size_t cap,
                           size_t *n_critical,
                           double *alternating_sum);

// Model with `n` oscillators of natural frequency `omega`. The coupling is
// copied and must be admissible.
enum MsStatus ms_model_new(const struct MsCoupling *g,
                           double omega,
                           size_t n,
                           struct MsModel **out);

// Releases a model. NULL is ignored.
void ms_model_free(struct MsModel *m);

// Rotating-frame vector field at an interior reduced state; `x` and `out`
// both hold `len` = N−1 doubles.
enum MsStatus ms_reduced_field(const struct MsModel *m, const double *x, size_t len, double *out);

// Analytic rate of change of the total-variation distance between two
// interior states.
enum MsStatus ms_distance_rate(const struct MsModel *m,
                               const double *x,
                               const double *y,
                               size_t len,
                               double *out);

// Default integrator settings.
struct MsSimOptions ms_sim_options_default(void);

// Integrates from the reduced state `x` (length N−1, oscillator 1 at
// phase 0). `opts` may be NULL for the defaults.
enum MsStatus ms_simulate(const struct MsModel *m,
                          const double *x,
                          size_t len,
                          const struct MsSimOptions *opts,
                          struct MsTrajectory **out);

// Releases a trajectory. NULL is ignored.
void ms_trajectory_free(struct MsTrajectory *t);

// Number of recorded samples, or 0 for NULL.
size_t ms_trajectory_n_samples(const struct MsTrajectory *t);

// Number of synchronization events, or 0 for NULL.
size_t ms_trajectory_n_events(const struct MsTrajectory *t);

// Time and N absolute phases (wrapped into [0, 2π)) of sample `i`.
enum MsStatus ms_trajectory_sample(const struct MsTrajectory *t,
                                   size_t i,
                                   double *time,
                                   double *phases,
                                   size_t len);

// How the run ended; `time` receives the terminal time (the horizon is
// reported as the last sample time).
enum MsStatus ms_trajectory_terminal(const struct MsTrajectory *t,
                                     enum MsTerminal *kind,
                                     double *time);

// Time and resulting multiplicity of event `i`.
enum MsStatus ms_trajectory_event(const struct MsTrajectory *t,
                                  size_t i,
                                  double *time,
                                  size_t *multiplicity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONOSYNC_H */
