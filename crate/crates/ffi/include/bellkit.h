#ifndef BELLKIT_H
#define BELLKIT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum BkStatus {
  BK_STATUS_OK = 0,
  BK_STATUS_NULL_POINTER = 1,
  BK_STATUS_INVALID_ARGUMENT = 2,
  BK_STATUS_NUMERICAL = 3,
  BK_STATUS_UNSUPPORTED = 4,
  BK_STATUS_BUFFER_TOO_SMALL = 5,
  BK_STATUS_PANIC = 6,
} BkStatus;

/**
 * Bell diagonal state together with its correlation matrix.
 */
typedef struct BkState BkState;

/**
 * Optimal SSC witness.
 */
typedef struct BkWitness BkWitness;

/**
 * Criterion value with its threshold.
 */
typedef struct BkCriterion {
  double value;
  double threshold;
  bool detected;
} BkCriterion;

/**
 * One row of the homogeneity diophantine table.
 */
typedef struct BkDiophantine {
  size_t d;
  size_t size;
  size_t k;
  double ccnr_excess;
} BkDiophantine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message of this thread, without the
 * terminating NUL; 0 when the last call succeeded.
 */
size_t bk_last_error_length(void);

/**
 * Copies the last error message (NUL terminated, truncated to fit) into
 * `buf` and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
size_t bk_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bk_version(void);

/**
 * Creates a Bell diagonal state from a row-major `d_a * d_b` probability matrix.
 *
 * # Safety
 * `p` must point to `d_a * d_b` doubles and `out` to a writable handle slot.
 */
enum BkStatus bk_state_from_probabilities(size_t d_a,
                                          size_t d_b,
                                          const double *p,
                                          struct BkState **out_state);

/**
 * Creates the dichotomous state of a named support (e.g. "eq21").
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum BkStatus bk_state_from_builtin(const char *name, struct BkState **out_state);

/**
 * New state `(1 - eps) rho + eps * identity / (d_a d_b)`.
 *
 * # Safety
 * `state` must be a live handle and `out` a writable handle slot.
 */
enum BkStatus bk_state_with_noise(const struct BkState *state,
                                  double eps,
                                  struct BkState **out_state);

/**
 * Releases a state handle; null is ignored.
 *
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void bk_state_free(struct BkState *state);

/**
 * Local dimensions of a state.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_state_dims(const struct BkState *state, size_t *d_a, size_t *d_b);

/**
 * Copies the row-major `(d_a d_b)^2` density matrix into `re` and `im`.
 *
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum BkStatus bk_state_density(const struct BkState *state, double *re, double *im, size_t len);

/**
 * CCNR criterion.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_state_ccnr(const struct BkState *state, struct BkCriterion *result);

/**
 * de Vicente criterion.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_state_de_vicente(const struct BkState *state, struct BkCriterion *result);

/**
 * Smallest eigenvalue of the partial transpose and the PPT verdict.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_state_ppt(const struct BkState *state, double *min_eig, bool *is_ppt);

/**
 * SSC value `g(x, y)` and its bound `R(x, y)`; negative `g` detects entanglement.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_state_ssc(const struct BkState *state,
                           double x,
                           double y,
                           double *g,
                           double *bound);

/**
 * Largest white-noise fraction still detected at `(x, y)`, by bisection to `tol`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_state_noise_threshold(const struct BkState *state,
                                       double x,
                                       double y,
                                       double tol,
                                       double *eps_max);

/**
 * Optimal witness at `(x, y)` and its expectation value on the state.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_witness_optimal(const struct BkState *state,
                                 double x,
                                 double y,
                                 struct BkWitness **out_witness,
                                 double *value);

/**
 * Whether an expectation value counts as a detection.
 */
bool bk_is_detection(double value);

/**
 * Expectation value of a witness on a state.
 *
 * # Safety
 * Pointers must be valid.
 */
enum BkStatus bk_witness_expectation(const struct BkWitness *witness,
                                     const struct BkState *state,
                                     double *value);

/**
 * Copies the row-major `(d_a d_b)^2` witness operator into `re` and `im`.
 *
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum BkStatus bk_witness_matrix(const struct BkWitness *witness,
                                double *re,
                                double *im,
                                size_t len);

/**
 * Releases a witness handle; null is ignored.
 *
 * # Safety
 * `witness` must be null or a handle not yet freed.
 */
void bk_witness_free(struct BkWitness *witness);

/**
 * Fills `rows` with the nontrivial homogeneity solutions for `dmin <= d <= dmax`.
 * `count` receives the total number of rows; when it exceeds `cap` the call
 * returns `BufferTooSmall` after writing the first `cap` rows.
 *
 * # Safety
 * `rows` must be null (with `cap == 0`) or point to `cap` writable rows.
 */
enum BkStatus bk_diophantine(size_t dmin,
                             size_t dmax,
                             struct BkDiophantine *rows,
                             size_t cap,
                             size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELLKIT_H */
