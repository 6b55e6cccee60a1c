#ifndef DSOSLRC_H
#define DSOSLRC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_DIMENSION_MISMATCH = 3,
  DS_STATUS_BUFFER_TOO_SMALL = 4,
  DS_STATUS_INFEASIBLE = 5,
  DS_STATUS_UNBOUNDED = 6,
  DS_STATUS_ITERATION_LIMIT = 7,
  DS_STATUS_PROTOCOL_VIOLATION = 8,
  DS_STATUS_PANIC = 9,
} DsStatus;

typedef enum DsAlgorithm {
  DS_ALGORITHM_DS_OSLRC = 0,
  DS_ALGORITHM_DS_POSLRC = 1,
  DS_ALGORITHM_UNIFORM_BASELINE = 2,
  DS_ALGORITHM_FULL_INFO_ORACLE = 3,
} DsAlgorithm;

/**
 * Step-wise learner.
 */
typedef struct DsLearner DsLearner;

/**
 * Threshold schedule with its running `nu` state.
 */
typedef struct DsSchedule DsSchedule;

/**
 * Problem description shared by the schedule and learner constructors.
 * `k0 = 0` selects the base protocol; `c` in `(0, 1]` scales the threshold
 * (`c = 1` is the exact schedule).
 */
typedef struct DsProblem {
  size_t d;
  size_t k;
  size_t k0;
  double sigma;
  double delta;
  double delta_s;
  double c;
} DsProblem;

typedef struct DsConstants {
  double g;
  double mu1;
  double mu2;
  double s0;
  double s1;
  double a1;
  double a2;
  double a3;
  double a4;
  double a5;
  double y_delta;
  double rho;
  double epsilon;
} DsConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a NUL-terminated string with static lifetime.
 */
const char *ds_version(void);

/**
 * Static description of a `DsStatus` value.
 */
const char *ds_status_message(uint32_t status);

/**
 * Joint inclusion probability of `n` (1 to 3) distinct indices under the
 * sampler with weights `q[0..d]` (normalized internally) and budget `k`.
 *
 * # Safety
 * `q` must point to `d` readable doubles, `idx` to `n` indices, and `out`
 * to one writable double.
 */
enum DsStatus ds_inclusion_probability(const double *q,
                                       size_t d,
                                       size_t k,
                                       const size_t *idx,
                                       size_t n,
                                       double *out);

/**
 * Inclusion probabilities of every single index, written to `out[0..d]`.
 *
 * # Safety
 * `q` and `out` must point to `d` doubles.
 */
enum DsStatus ds_single_inclusion(const double *q, size_t d, size_t k, double *out);

/**
 * Solves `min ||w||_1` subject to `||bbar - M w||_inf <= gamma` with `M`
 * given row-major.
 *
 * # Safety
 * `bbar` and `w_out` must hold `d` doubles, `mbar` `d * d` doubles;
 * `objective_out` may be null.
 */
enum DsStatus ds_solve_dantzig(const double *bbar,
                               const double *mbar,
                               size_t d,
                               double gamma,
                               double *w_out,
                               double *objective_out);

/**
 * # Safety
 * `problem` must be readable and `out` writable.
 */
enum DsStatus ds_schedule_new(const struct DsProblem *problem, struct DsSchedule **out);

/**
 * Threshold for exploration index `s`; calls must use nondecreasing `s`.
 *
 * # Safety
 * `h` must come from [`ds_schedule_new`]; `out` must be writable.
 */
enum DsStatus ds_schedule_gamma_hat(struct DsSchedule *h, uint64_t s, double *out);

/**
 * # Safety
 * `h` must come from [`ds_schedule_new`]; `out` must be writable.
 */
enum DsStatus ds_schedule_constants(const struct DsSchedule *h, struct DsConstants *out);

/**
 * # Safety
 * `h` must come from [`ds_schedule_new`] (or be null) and not be used again.
 */
void ds_schedule_free(struct DsSchedule *h);

/**
 * Creates a learner; `algorithm` is a `DsAlgorithm` value.
 *
 * # Safety
 * `problem` must be readable and `out` writable.
 */
enum DsStatus ds_learner_new(uint32_t algorithm,
                             const struct DsProblem *problem,
                             uint64_t seed,
                             struct DsLearner **out);

/**
 * Starts a round; writes the coordinates to reveal before predicting.
 * `cap` must be at least `d`.
 *
 * # Safety
 * `h` must come from [`ds_learner_new`]; `idx_out` must hold `cap` indices.
 */
enum DsStatus ds_learner_query(struct DsLearner *h, size_t *idx_out, size_t cap, size_t *n_out);

/**
 * # Safety
 * `values` must hold `n` doubles (the queried coordinates, in query order);
 * `y_hat_out` must be writable.
 */
enum DsStatus ds_learner_predict(struct DsLearner *h,
                                 const double *values,
                                 size_t n,
                                 double *y_hat_out);

/**
 * Records the label; writes the coordinates to reveal afterwards (none for
 * the base protocol). `cap` must be at least `d`.
 *
 * # Safety
 * `h` must come from [`ds_learner_new`]; `idx_out` must hold `cap` indices.
 */
enum DsStatus ds_learner_observe_label(struct DsLearner *h,
                                       double y,
                                       size_t *idx_out,
                                       size_t cap,
                                       size_t *n_out);

/**
 * Finishes the round with the follow-up values.
 *
 * # Safety
 * `values` must hold `n` doubles.
 */
enum DsStatus ds_learner_complete(struct DsLearner *h, const double *values, size_t n);

/**
 * Copies the current selector estimate into `w_out[0..d]`.
 *
 * # Safety
 * `w_out` must hold `d` doubles.
 */
enum DsStatus ds_learner_weights(const struct DsLearner *h, double *w_out, size_t d);

/**
 * Writes the current estimated support (increasing order).
 *
 * # Safety
 * `idx_out` must hold `cap` indices.
 */
enum DsStatus ds_learner_support(const struct DsLearner *h,
                                 size_t *idx_out,
                                 size_t cap,
                                 size_t *n_out);

/**
 * # Safety
 * `h` must come from [`ds_learner_new`] (or be null) and not be used again.
 */
void ds_learner_free(struct DsLearner *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSOSLRC_H */
