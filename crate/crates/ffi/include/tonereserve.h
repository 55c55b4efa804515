#ifndef TONERESERVE_H
#define TONERESERVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TrMethod {
  TR_METHOD_LP = 0,
  TR_METHOD_POCS = 1,
  TR_METHOD_BRUTE = 2,
} TrMethod;

typedef enum TrStatus {
  TR_STATUS_OK = 0,
  TR_STATUS_NULL_POINTER = 1,
  TR_STATUS_INVALID_ARGUMENT = 2,
  TR_STATUS_NOT_POWER_OF_TWO = 3,
  TR_STATUS_INDEX_OUT_OF_RANGE = 4,
  TR_STATUS_SIZE_OVERFLOW = 5,
  TR_STATUS_EMPTY_SET = 6,
  TR_STATUS_ZERO_VECTOR = 7,
  TR_STATUS_DEGENERATE = 8,
  TR_STATUS_INTERNAL = 9,
  TR_STATUS_PANIC = 10,
} TrStatus;

typedef enum TrSystem {
  TR_SYSTEM_WALSH = 0,
  TR_SYSTEM_FOURIER = 1,
} TrSystem;

// An extension problem: information set, compensation set and coefficients.
typedef struct TrProblem TrProblem;

// Solver output for a [`TrProblem`].
typedef struct TrResult TrResult;

// Split trace and witness for a Walsh index set.
typedef struct TrTrace TrTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *tr_last_error_message(void);

// Releases a string returned by a `*_to_json` function.
//
// # Safety
// `s` must be null or a pointer obtained from this library and not yet freed.
void tr_string_free(char *s);

// Builds a problem from 1-based indices and coefficients. `re` and `im`
// hold one value per information index; `im` may be null for real data.
//
// # Safety
// Array pointers must reference at least the stated number of elements;
// `out_problem` must be writable.
enum TrStatus tr_problem_new(enum TrSystem system_tag,
                             size_t n,
                             const size_t *info,
                             size_t info_len,
                             const size_t *comp,
                             size_t comp_len,
                             const double *re,
                             const double *im,
                             struct TrProblem **out_problem);

// Parses a problem from its JSON form.
//
// # Safety
// `json` must be a NUL-terminated string; `out_problem` must be writable.
enum TrStatus tr_problem_from_json(const char *json, struct TrProblem **out_problem);

// Serializes a problem to JSON; release with [`tr_string_free`].
//
// # Safety
// `problem` must be a live handle; `out_json` must be writable.
enum TrStatus tr_problem_to_json(const struct TrProblem *problem, char **out_json);

// # Safety
// `problem` must be null or a live handle from this library.
void tr_problem_free(struct TrProblem *problem);

// Minimizes the peak over compensation coefficients.
// Zero `max_iterations` or non-positive `tolerance` selects the defaults.
//
// # Safety
// `problem` must be a live handle; `out_result` must be writable.
enum TrStatus tr_solve(const struct TrProblem *problem,
                       enum TrMethod method,
                       size_t max_iterations,
                       double tolerance,
                       struct TrResult **out_result);

// Peak of the compensated signal and whether the solver converged.
//
// # Safety
// `result` must be a live handle; the output pointers must be writable.
enum TrStatus tr_result_summary(const struct TrResult *result,
                                double *out_sup,
                                double *out_gap,
                                bool *out_converged);

// Copies the dense compensation vector (`b_k` at position `k − 1`) into
// `re` and `im`, each of length `len`, which must equal N.
//
// # Safety
// `result` must be a live handle; `re` and `im` must hold `len` elements.
enum TrStatus tr_result_compensation(const struct TrResult *result,
                                     double *re,
                                     double *im,
                                     size_t len);

// # Safety
// `result` must be a live handle; `out_json` must be writable.
enum TrStatus tr_result_to_json(const struct TrResult *result, char **out_json);

// # Safety
// `result` must be null or a live handle from this library.
void tr_result_free(struct TrResult *result);

// PAPR of the dense coefficient vector `(re[k] + i im[k])`, `k < n`.
// `im` may be null for real data.
//
// # Safety
// `re` (and `im` if non-null) must hold `n` elements; `out_papr` must be writable.
enum TrStatus tr_papr(enum TrSystem system_tag,
                      size_t n,
                      const double *re,
                      const double *im,
                      double *out_papr);

// Runs the Walsh splitting procedure on a 1-based index set.
//
// # Safety
// `indices` must hold `len` elements; `out_trace` must be writable.
enum TrStatus tr_split_trace(size_t n,
                             const size_t *indices,
                             size_t len,
                             struct TrTrace **out_trace);

// Number of completed stages `m` and whether both witness bounds hold.
//
// # Safety
// `trace` must be a live handle; the output pointers must be writable.
enum TrStatus tr_trace_summary(const struct TrTrace *trace,
                               size_t *out_stages,
                               bool *out_bounds_hold);

// Stage-by-stage trace as JSON; release with [`tr_string_free`].
//
// # Safety
// `trace` must be a live handle; `out_json` must be writable.
enum TrStatus tr_trace_to_json(const struct TrTrace *trace, char **out_json);

// # Safety
// `trace` must be null or a live handle from this library.
void tr_trace_free(struct TrTrace *trace);

// Lower bound on the Walsh extension constant at density `delta`, with the
// stage count `m` it is built from.
//
// # Safety
// Output pointers must be writable.
enum TrStatus tr_cex_lower_bound_walsh(double delta, size_t n, double *out_bound, size_t *out_m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TONERESERVE_H */
