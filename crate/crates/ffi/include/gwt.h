#ifndef GWT_H
#define GWT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum GwtStatus {
  GWT_STATUS_OK = 0,
  GWT_STATUS_NULL_POINTER = 1,
  /**
   * Bad sizes, parameters or graph definitions.
   */
  GWT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Non-invertible bank, singular system or infeasible design.
   */
  GWT_STATUS_MATH = 3,
  GWT_STATUS_IO = 4,
  GWT_STATUS_PANIC = 5,
} GwtStatus;

typedef enum GwtBank {
  GWT_BANK_HGSWT = 0,
  GWT_BANK_HGESWT = 1,
  GWT_BANK_HCGSWT = 2,
  GWT_BANK_HCGESWT = 3,
} GwtBank;

/**
 * Opaque circulant graph.
 */
typedef struct GwtGraph GwtGraph;

/**
 * Opaque single-level transform: a bank bound to a sampling pattern.
 */
typedef struct GwtTransform GwtTransform;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or writable for `len` bytes.
 */
size_t gwt_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gwt_version(void);

/**
 * Circulant graph on `n` nodes with hops `hops[i]` of weight `weights[i]`
 * (all 1 when `weights` is null).
 *
 * # Safety
 * `hops` (and `weights` if non-null) must hold `count` entries; `out` must be writable.
 */
enum GwtStatus gwt_graph_new(size_t n,
                             const size_t *hops,
                             const double *weights,
                             size_t count,
                             struct GwtGraph **out);

/**
 * Graph from its JSON description, e.g. `{"n":16,"gens":[{"s":1,"w":1.0}]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GwtStatus gwt_graph_from_json(const char *json, struct GwtGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from this library, not yet freed.
 */
void gwt_graph_free(struct GwtGraph *g);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t gwt_graph_size(const struct GwtGraph *g);

/**
 * # Safety
 * `g` must be a live handle and `degree` writable.
 */
enum GwtStatus gwt_graph_degree(const struct GwtGraph *g, double *degree);

/**
 * Builds a bank and binds it to a pattern. `alphas` may be null when
 * `n_alphas` is 0; `hyperbolic` (nullable) flags hyperbolic exponents.
 * `pattern` (nullable, `n` bytes) marks low-pass nodes with non-zero bytes;
 * null selects the alternating pattern. With `require_invertible` set, a
 * bank that fails the invertibility check is refused with `Math`.
 *
 * # Safety
 * All non-null pointers must be valid for the stated lengths.
 */
enum GwtStatus gwt_transform_new(const struct GwtGraph *g,
                                 enum GwtBank bank,
                                 uint32_t k,
                                 const double *alphas,
                                 const uint8_t *hyperbolic,
                                 size_t n_alphas,
                                 bool dual_moments,
                                 const uint8_t *pattern,
                                 bool require_invertible,
                                 struct GwtTransform **out);

/**
 * # Safety
 * `t` must be null or a live handle.
 */
void gwt_transform_free(struct GwtTransform *t);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t gwt_transform_size(const struct GwtTransform *t);

/**
 * Writes whether the analysis operator is invertible.
 *
 * # Safety
 * `t` must be a live handle and `invertible` writable.
 */
enum GwtStatus gwt_transform_is_invertible(const struct GwtTransform *t, bool *invertible);

/**
 * Forward transform of a length-`len` signal. `im_in` and `im_out` may be null
 * for real data.
 *
 * # Safety
 * Non-null buffers must hold `len` values.
 */
enum GwtStatus gwt_transform_analyze(const struct GwtTransform *t,
                                     const double *re_in,
                                     const double *im_in,
                                     size_t len,
                                     double *re_out,
                                     double *im_out);

/**
 * Inverse transform; same buffer conventions as [`gwt_transform_analyze`].
 *
 * # Safety
 * Non-null buffers must hold `len` values.
 */
enum GwtStatus gwt_transform_invert(const struct GwtTransform *t,
                                    const double *re_in,
                                    const double *im_in,
                                    size_t len,
                                    double *re_out,
                                    double *im_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GWT_H */
