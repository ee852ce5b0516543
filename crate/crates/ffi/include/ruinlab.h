#ifndef RUINLAB_H
#define RUINLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RuinlabStatus {
  RUINLAB_STATUS_OK = 0,
  RUINLAB_STATUS_NULL_POINTER = 1,
  RUINLAB_STATUS_INVALID_UTF8 = 2,
  RUINLAB_STATUS_CONFIG = 3,
  RUINLAB_STATUS_DOMAIN = 4,
  RUINLAB_STATUS_SATURATION = 5,
  RUINLAB_STATUS_SIMULATION_BUDGET = 6,
  RUINLAB_STATUS_REFUSED = 7,
  RUINLAB_STATUS_CLASS = 8,
  RUINLAB_STATUS_NUMERIC = 9,
  RUINLAB_STATUS_IO = 10,
  RUINLAB_STATUS_PANIC = 11,
} RuinlabStatus;

typedef struct RuinlabClaims RuinlabClaims;

typedef struct RuinlabModel RuinlabModel;

typedef struct RuinlabRisk RuinlabRisk;

// Monte Carlo estimate. `asymptotic` and `ratio` are NaN when not applicable.
typedef struct RuinlabEstimate {
  double estimate;
  double std_error;
  double ci_low;
  double ci_high;
  double asymptotic;
  double ratio;
  // Horizon actually simulated; the truncation horizon for infinite-horizon runs.
  double horizon;
  uint64_t n_paths;
  uint64_t seed;
} RuinlabEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next failing call.
const char *ruinlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *ruinlab_version(void);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RuinlabStatus ruinlab_claims_from_json(const char *json, struct RuinlabClaims **out);

// # Safety
// `claims` must be null or a handle from [`ruinlab_claims_from_json`] not yet freed.
void ruinlab_claims_free(struct RuinlabClaims *claims);

// # Safety
// `claims` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_claims_mean(const struct RuinlabClaims *claims, double *out);

// `P(C ≥ x)`.
//
// # Safety
// `claims` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_claims_tail(const struct RuinlabClaims *claims, double x, double *out);

// Integrated tail `B̄₀(x)`.
//
// # Safety
// `claims` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_claims_integrated_tail(const struct RuinlabClaims *claims,
                                                  double x,
                                                  double *out);

// # Safety
// `claims` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_claims_mean_excess(const struct RuinlabClaims *claims,
                                              double u,
                                              double *out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RuinlabStatus ruinlab_model_from_json(const char *json, struct RuinlabModel **out);

// # Safety
// `model` must be null or a handle from [`ruinlab_model_from_json`] not yet freed.
void ruinlab_model_free(struct RuinlabModel *model);

// # Safety
// `model` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_model_mean_rate(const struct RuinlabModel *model, double *out);

// Rate function at `x`; `+INFINITY` outside the effective domain.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_rate_function(const struct RuinlabModel *model, double x, double *out);

// Number of arrivals in `[0, horizon]` on path `path_index` of `seed`.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_simulate_count(const struct RuinlabModel *model,
                                          double horizon,
                                          uint64_t seed,
                                          uint64_t path_index,
                                          uint64_t *out);

// Parses a risk configuration (`u`, `p`, `claims`, `arrivals`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RuinlabStatus ruinlab_risk_from_json(const char *json, struct RuinlabRisk **out);

// # Safety
// `risk` must be null or a handle from [`ruinlab_risk_from_json`] not yet freed.
void ruinlab_risk_free(struct RuinlabRisk *risk);

// # Safety
// `risk` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_risk_rho(const struct RuinlabRisk *risk, double *out);

// `ψ(u)` by simulation to the truncation horizon. `workers = 0` uses every core.
//
// # Safety
// `risk` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_ruin_infinite(const struct RuinlabRisk *risk,
                                         double u,
                                         uint64_t n_paths,
                                         uint64_t seed,
                                         size_t workers,
                                         struct RuinlabEstimate *out);

// `ψ(u, z)`.
//
// # Safety
// `risk` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_ruin_finite(const struct RuinlabRisk *risk,
                                       double u,
                                       double z,
                                       uint64_t n_paths,
                                       uint64_t seed,
                                       size_t workers,
                                       struct RuinlabEstimate *out);

// `ρ/(1 − ρ)·B̄₀(u)`.
//
// # Safety
// `risk` must be a live handle; `out` must be writable.
enum RuinlabStatus ruinlab_asymptotic_infinite(const struct RuinlabRisk *risk,
                                               double u,
                                               double *out);

// Finite-horizon asymptotic at scaled time `t_scaled`; the horizon `z = e(u)·T` goes to `horizon` if non-null.
//
// # Safety
// `risk` must be a live handle; `out` must be writable; `horizon` may be null.
enum RuinlabStatus ruinlab_asymptotic_finite(const struct RuinlabRisk *risk,
                                             double u,
                                             double t_scaled,
                                             double *out,
                                             double *horizon);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RUINLAB_H */
