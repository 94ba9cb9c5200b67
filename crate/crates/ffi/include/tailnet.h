#ifndef TAILNET_H
#define TAILNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define TAILNET_OK 0

/**
 * Input file could not be parsed.
 */
#define TAILNET_ERR_PARSE 2

/**
 * Numeric or model failure.
 */
#define TAILNET_ERR_NUMERIC 3

/**
 * Invalid configuration or argument.
 */
#define TAILNET_ERR_CONFIG 4

/**
 * Null pointer or invalid handle.
 */
#define TAILNET_ERR_POINTER 5

/**
 * Opaque aligned panel of returns and state variables.
 */
typedef struct TailnetPanel TailnetPanel;

/**
 * Opaque symmetric VaR–ΔCoVaR risk matrix.
 */
typedef struct TailnetRiskMatrix TailnetRiskMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for the calling thread. Copies up to `cap - 1` bytes
 * into `buf` and NUL-terminates; returns the full message length.
 */
uintptr_t tailnet_last_error(char *buf, uintptr_t cap);

/**
 * Load and align returns and state CSV files.
 *
 * # Safety
 * `returns_path` and `state_path` must be NUL-terminated strings and
 * `out` a valid pointer; the returned handle must be released with
 * `tailnet_panel_free`.
 */
int tailnet_panel_load(const char *returns_path, const char *state_path, TailnetPanel **out);

/**
 * Build a panel from row-major buffers: returns is `n_assets * t`, state
 * is `p_state * t`, both indexed `[series][period]`.
 *
 * # Safety
 * Buffers must hold the stated number of f64 values.
 */
int tailnet_panel_from_arrays(const double *returns,
                              uintptr_t n_assets,
                              const double *state,
                              uintptr_t p_state,
                              uintptr_t t,
                              TailnetPanel **out);

/**
 * # Safety
 * `panel` must come from a `tailnet_panel_*` constructor; it is invalid
 * after this call.
 */
void tailnet_panel_free(TailnetPanel *panel);

/**
 * Estimate the risk matrix from a panel at quantile level `tau`.
 *
 * # Safety
 * `panel` must be a live handle and `out` a valid pointer; release the
 * result with `tailnet_risk_matrix_free`.
 */
int tailnet_estimate(const TailnetPanel *panel, double tau, TailnetRiskMatrix **out);

/**
 * Wrap an existing symmetric matrix (row-major, n*n) as a risk matrix.
 *
 * # Safety
 * `values` must hold `n * n` f64 values.
 */
int tailnet_risk_matrix_from_array(const double *values,
                                   uintptr_t n,
                                   double tau,
                                   TailnetRiskMatrix **out);

/**
 * Number of nodes in the risk matrix, or 0 for a null handle.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
uintptr_t tailnet_risk_matrix_dim(const TailnetRiskMatrix *matrix);

/**
 * 1 if the matrix is numerically positive definite, else 0.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
int tailnet_risk_matrix_is_pd(const TailnetRiskMatrix *matrix);

/**
 * Copy the matrix entries row-major into `buf` (length n*n).
 *
 * # Safety
 * `buf` must hold at least `n * n` f64 values.
 */
int tailnet_risk_matrix_values(const TailnetRiskMatrix *matrix, double *buf);

/**
 * # Safety
 * `matrix` must come from a constructor; it is invalid after this call.
 */
void tailnet_risk_matrix_free(TailnetRiskMatrix *matrix);

/**
 * Centrality scores of the risk graph; `kind`: 0 degree, 1 eigenvector,
 * 2 katz, 3 pagerank, 4 closeness, 5 betweenness, 6 leverage. `buf` must
 * hold n values.
 *
 * # Safety
 * `matrix` must be a live handle and `buf` sized to the node count.
 */
int tailnet_centrality(const TailnetRiskMatrix *matrix, int kind, double *buf);

/**
 * Minimum-variance portfolio weights; `buf` must hold n values.
 *
 * # Safety
 * `matrix` must be a live handle and `buf` sized to the node count.
 */
int tailnet_min_variance_weights(const TailnetRiskMatrix *matrix, double *buf);

/**
 * Feature ordering by centrality exclusion. Writes the removal order
 * (node indices) into `order` and the objective trace into `objective`,
 * both of length n-1; `*stop_index` receives the number of removals at
 * which the stopping rule fired.
 *
 * # Safety
 * `order` and `objective` must hold n-1 values each.
 */
int tailnet_foce(const TailnetRiskMatrix *matrix,
                 int kind,
                 double epsilon,
                 uintptr_t *order,
                 double *objective,
                 uintptr_t *stop_index);

/**
 * Debiased nodewise-Lasso precision estimate. `data` is row-major n*p
 * (observations by variables); `omega` receives p*p row-major entries.
 * `lambda_scale` is the multiplier c in lambda = c*sqrt(log p / n).
 *
 * # Safety
 * `data` must hold n*p values, `omega` p*p values.
 */
int tailnet_precision(const double *data,
                      uintptr_t n,
                      uintptr_t p,
                      double lambda_scale,
                      double *omega);

/**
 * Simulate the benchmark regression design. `x` receives n*p and `y`
 * n*m row-major entries; pass null to skip either output.
 *
 * # Safety
 * Non-null buffers must be correctly sized.
 */
int tailnet_simulate_dgp(uintptr_t n,
                         uintptr_t m,
                         uintptr_t p,
                         uintptr_t rank,
                         double ar_decay,
                         uint64_t seed,
                         double *x,
                         double *y);

/**
 * Node name at `index`, copied NUL-terminated into `buf`; returns the
 * full name length or 0 when out of range.
 *
 * # Safety
 * `buf` must hold `cap` bytes.
 */
uintptr_t tailnet_risk_matrix_name(const TailnetRiskMatrix *matrix,
                                   uintptr_t index,
                                   char *buf,
                                   uintptr_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TAILNET_H */
