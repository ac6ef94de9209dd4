#ifndef SPECTRUM_LEASE_H
#define SPECTRUM_LEASE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_PARAMETER = 2,
  SL_STATUS_MARKET_SHAPE = 3,
  SL_STATUS_INDEX_OUT_OF_RANGE = 4,
  SL_STATUS_NOT_IN_SET = 5,
  SL_STATUS_COMBINATORICS_BUDGET = 6,
  SL_STATUS_QUADRATURE_NON_CONVERGENCE = 7,
  SL_STATUS_UNBOUNDED_HORIZON = 8,
  SL_STATUS_NOT_HOMOGENEOUS = 9,
  SL_STATUS_SAMPLING = 10,
  SL_STATUS_PANIC = 11,
} SlStatus;

/**
 * Whose parameters a revenue is evaluated with.
 */
typedef enum SlView {
  SL_VIEW_TRUE = 0,
  /**
   * Operator `self_index` knows itself and estimates the rest.
   */
  SL_VIEW_SELF_VIEW = 1,
  SL_VIEW_REGULATOR = 2,
} SlView;

/**
 * Opaque market handle.
 */
typedef struct SlMarket SlMarket;

/**
 * Parameters of one operator. `max_lease == 0` means unbounded.
 */
typedef struct SlOperator {
  double mu;
  double sigma;
  /**
   * AR(1) autocorrelation in `[0, 1)`.
   */
  double a;
  double rho;
  double mer;
  uint64_t max_lease;
} SlOperator;

/**
 * Solver output. Entrant counts refer to the sets at `t_star`; the members
 * can be listed with `sl_perceived_entrants` and `sl_equilibrium_entrants`.
 */
typedef struct SlSolveResult {
  uint64_t t_star;
  double u_perceived;
  double u_true;
  size_t n_perceived;
  size_t n_true;
  uint64_t eval_count;
} SlSolveResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a market of `n` operators competing for `channels` channels.
 * `estimates` may be null for complete information. On success `*out_market` owns
 * a handle to release with `sl_market_free`.
 *
 * # Safety
 * `truth` (and `estimates` when non-null) must point to `n` operators and
 * `out_market` must be valid for writes.
 */
enum SlStatus sl_market_new(size_t channels,
                            size_t n,
                            const struct SlOperator *truth,
                            const struct SlOperator *estimates,
                            struct SlMarket **out_market);

/**
 * Releases a handle from `sl_market_new`. Null is ignored.
 *
 * # Safety
 * `market` must be null or a live handle not used afterwards.
 */
void sl_market_free(struct SlMarket *market);

/**
 * Number of operators in the market, or 0 for a null handle.
 *
 * # Safety
 * `market` must be null or a live handle.
 */
size_t sl_market_len(const struct SlMarket *market);

/**
 * Sets the Gauss–Hermite starting node count used by later calls.
 *
 * # Safety
 * `market` must be null or a live handle.
 */
enum SlStatus sl_market_set_quadrature_nodes(struct SlMarket *market, size_t nodes);

/**
 * Interval-sweep solver. `horizon` replaces unbounded caps; 0 means none.
 *
 * # Safety
 * `market` must be a live handle and `result` valid for writes.
 */
enum SlStatus sl_solve_sweep(const struct SlMarket *market,
                             uint64_t horizon_cap,
                             struct SlSolveResult *result);

/**
 * Exhaustive scan over every lease duration up to the largest estimated cap.
 *
 * # Safety
 * `market` must be a live handle and `result` valid for writes.
 */
enum SlStatus sl_brute_force(const struct SlMarket *market,
                             uint64_t horizon_cap,
                             struct SlSolveResult *result);

/**
 * Baseline restricted to durations at which every operator enters.
 *
 * # Safety
 * `market` must be a live handle and `result` valid for writes.
 */
enum SlStatus sl_solve_subop(const struct SlMarket *market,
                             uint64_t horizon_cap,
                             struct SlSolveResult *result);

/**
 * Closed-form solver; the market must be homogeneous with complete
 * information.
 *
 * # Safety
 * `market` must be a live handle and `result` valid for writes.
 */
enum SlStatus sl_solve_homogeneous(const struct SlMarket *market, struct SlSolveResult *result);

/**
 * Expected epoch revenue of operator `k` when `set` (zero-based indices)
 * enters at lease duration `t`.
 *
 * # Safety
 * `market` must be a live handle, `set` must point to `set_len` indices and
 * `revenue` must be valid for writes.
 */
enum SlStatus sl_revenue(const struct SlMarket *market,
                         enum SlView view,
                         size_t self_index,
                         const size_t *set,
                         size_t set_len,
                         size_t k,
                         uint64_t t,
                         double *revenue);

/**
 * Entrants the regulator predicts at `t`. Writes up to `cap` zero-based
 * indices into `buf` and the full count into `*len`.
 *
 * # Safety
 * `market` must be a live handle, `buf` valid for `cap` writes (may be null
 * when `cap == 0`) and `len` valid for writes.
 */
enum SlStatus sl_perceived_entrants(const struct SlMarket *market,
                                    uint64_t t,
                                    size_t *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * Entrants of the operators' own equilibrium at `t`; same buffer contract as
 * `sl_perceived_entrants`.
 *
 * # Safety
 * As for `sl_perceived_entrants`.
 */
enum SlStatus sl_equilibrium_entrants(const struct SlMarket *market,
                                      uint64_t t,
                                      size_t *buf,
                                      size_t cap,
                                      size_t *len);

/**
 * Mean and standard deviation of one operator's revenue summed over `t`
 * slots.
 *
 * # Safety
 * `op` must be valid for reads and `mean`, `std_dev` valid for writes.
 */
enum SlStatus sl_epoch_stats(const struct SlOperator *op,
                             uint64_t t,
                             double *mean,
                             double *std_dev);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * always NUL-terminated when `len > 0`). Returns the full message length
 * without the terminator, or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t sl_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRUM_LEASE_H */
