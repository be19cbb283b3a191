#ifndef BRUSHLET_H
#define BRUSHLET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
#define BRUSHLET_OK 0

#define BRUSHLET_ERR_NULL 1

#define BRUSHLET_ERR_INVALID 2

#define BRUSHLET_ERR_OUT_OF_RANGE 3

#define BRUSHLET_ERR_INTERNAL 4

/**
 * Opaque covering handle.
 */
typedef struct BrushletCovering BrushletCovering;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread, or NULL when no error is recorded.
 * The caller owns the returned string.
 */
char *brushlet_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a brushlet function and not
 * yet freed; NULL is ignored.
 */
void brushlet_string_free(char *s);

/**
 * Build a covering for the anisotropy `a[0..dim]` and the given α, with
 * layers `0..=j_max` materialized. On success writes the handle and returns
 * `BRUSHLET_OK`.
 *
 * # Safety
 * `a` must point to `dim` readable doubles and `out` to a writable pointer
 * slot.
 */
int brushlet_covering_new(double alpha,
                          const double *a,
                          uintptr_t dim,
                          uint32_t j_max,
                          struct BrushletCovering **out);

/**
 * Release a covering handle. NULL is ignored.
 *
 * # Safety
 * `h` must be a handle from `brushlet_covering_new`, not yet freed.
 */
void brushlet_covering_free(struct BrushletCovering *h);

/**
 * Number of tiles in layer `j`.
 *
 * # Safety
 * `h` must be a live covering handle; `out` must be writable.
 */
int brushlet_layer_count(const struct BrushletCovering *h, uint32_t j, uintptr_t *out);

/**
 * JSON document for layer `j` (tiles, centers, cutoffs, measures).
 * Returns NULL on error; the caller frees the string.
 *
 * # Safety
 * `h` must be a live covering handle.
 */
char *brushlet_layer_json(const struct BrushletCovering *h, uint32_t j);

/**
 * SVG rendering of a d = 2 tiling up to layer `j_max`.
 * Returns NULL on error; the caller frees the string.
 *
 * # Safety
 * `h` must be a live covering handle.
 */
char *brushlet_tiling_svg(const struct BrushletCovering *h, uint32_t j_max);

/**
 * Anisotropic quasi-norm |x|_a of `x[0..dim]` under `a[0..dim]`.
 *
 * # Safety
 * `a` and `x` must point to `dim` readable doubles; `out` must be writable.
 */
int brushlet_quasi_norm(const double *a, const double *x, uintptr_t dim, double *out);

/**
 * Locate the tile containing `xi[0..dim]`: writes the layer and the
 * 1-based tile index. Returns `BRUSHLET_ERR_OUT_OF_RANGE` beyond the built
 * layers.
 *
 * # Safety
 * `h` must be a live covering handle; `xi` must point to `dim` readable
 * doubles matching the covering dimension; outputs must be writable.
 */
int brushlet_locate(const struct BrushletCovering *h,
                    const double *xi,
                    uintptr_t dim,
                    uint32_t *out_j,
                    uintptr_t *out_k);

/**
 * Analyze a centered Gaussian with per-dimension widths `sigma[0..dim]`:
 * coefficients on tiles meeting `[-bound, bound]^d` with cosine indices up
 * to `n_max`, as a JSON document. Returns NULL on error.
 *
 * # Safety
 * `h` must be a live covering handle; `sigma` must point to `dim` readable
 * doubles matching the covering dimension.
 */
char *brushlet_analyze_gaussian(const struct BrushletCovering *h,
                                const double *sigma,
                                uintptr_t dim,
                                double bound,
                                uint32_t n_max,
                                uintptr_t oversample,
                                uint32_t ramp_order);

/**
 * Discrete mixed norm of a coefficient JSON document (as produced by
 * `brushlet_analyze_gaussian`) with parameters (s, p, q); pass `q <= 0`
 * for the sup form.
 *
 * # Safety
 * `h` must be a live covering handle; `json` must be a NUL-terminated
 * string; `out` must be writable.
 */
int brushlet_m_norm(const struct BrushletCovering *h,
                    const char *json,
                    double s,
                    double p,
                    double q,
                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRUSHLET_H */
