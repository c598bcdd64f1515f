#ifndef CMV_SCATTER_H
#define CMV_SCATTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum CmvStatus {
  CMV_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CMV_STATUS_NULL_POINTER = 1,
  /**
   * Malformed arguments: bad sizes, unparsable strings, invalid configuration.
   */
  CMV_STATUS_INVALID_INPUT = 2,
  /**
   * Data outside the domain of the method (Szegő failure, |α| ≥ 1, ...).
   */
  CMV_STATUS_DOMAIN = 3,
  /**
   * The computation itself failed (conditioning, resolution, solver).
   */
  CMV_STATUS_NUMERICAL = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  CMV_STATUS_PANIC = 5,
} CmvStatus;

/**
 * Opaque scattering function sampled on a grid.
 */
typedef struct CmvScattering CmvScattering;

/**
 * Opaque sequence of Verblunsky coefficients.
 */
typedef struct CmvSequence CmvSequence;

/**
 * Numerical parameters. Obtain defaults from [`cmv_config_default`].
 */
typedef struct CmvConfig {
  /**
   * Inverse scattering computes levels `-levels..=levels`.
   */
  int64_t levels;
  size_t section_start;
  size_t section_cap;
  double section_tol;
  /**
   * CMV truncation half-width for direct scattering.
   */
  size_t window;
  /**
   * Neumann depth of the wandering-vector approximation.
   */
  size_t depth;
  /**
   * Smallest accepted `1 - sup |R|`.
   */
  double margin_min;
} CmvConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *cmv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cmv_version(void);

/**
 * Default numerical parameters.
 */
struct CmvConfig cmv_config_default(void);

/**
 * Builds a scattering function from Fourier coefficients `c_j`, `j = indices[i]`,
 * sampled on a grid of `grid_size` nodes (a power of two, at least 8).
 *
 * # Safety
 * `indices`, `re` and `im` must each point to `len` readable elements; `out` must be writable.
 */
enum CmvStatus cmv_scattering_from_coeffs(size_t grid_size,
                                          const int64_t *indices,
                                          const double *re,
                                          const double *im,
                                          size_t len,
                                          struct CmvScattering **out);

/**
 * Builds a scattering function from `grid_size` samples at the nodes `e^{2πik/grid_size}`.
 *
 * # Safety
 * `re` and `im` must each point to `grid_size` readable elements; `out` must be writable.
 */
enum CmvStatus cmv_scattering_from_samples(size_t grid_size,
                                           const double *re,
                                           const double *im,
                                           struct CmvScattering **out);

/**
 * Builds a built-in family from a spec such as `"random:8,0.2,1"`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum CmvStatus cmv_scattering_from_family(const char *spec,
                                          size_t grid_size,
                                          struct CmvScattering **out);

/**
 * # Safety
 * `r` must be a live handle or null; `out` must be writable.
 */
enum CmvStatus cmv_scattering_grid_size(const struct CmvScattering *r, size_t *out);

/**
 * Copies the grid samples; `len` must equal the grid size.
 *
 * # Safety
 * `re_out` and `im_out` must each have room for `len` elements.
 */
enum CmvStatus cmv_scattering_samples(const struct CmvScattering *r,
                                      double *re_out,
                                      double *im_out,
                                      size_t len);

/**
 * Fourier coefficient `c_j`.
 *
 * # Safety
 * `r` must be a live handle; `re_out` and `im_out` must be writable.
 */
enum CmvStatus cmv_scattering_coefficient(const struct CmvScattering *r,
                                          int64_t j,
                                          double *re_out,
                                          double *im_out);

/**
 * # Safety
 * `r` must come from this library and not be used afterwards. Null is ignored.
 */
void cmv_scattering_free(struct CmvScattering *r);

/**
 * Sequence `α_lo, ..., α_{lo+len-1}`; every `|α|` must be below 1.
 *
 * # Safety
 * `re` and `im` must each point to `len` readable elements; `out` must be writable.
 */
enum CmvStatus cmv_sequence_new(int64_t lo,
                                const double *re,
                                const double *im,
                                size_t len,
                                struct CmvSequence **out);

/**
 * First level and number of coefficients.
 *
 * # Safety
 * `s` must be a live handle; `lo_out` and `len_out` must be writable.
 */
enum CmvStatus cmv_sequence_bounds(const struct CmvSequence *s, int64_t *lo_out, size_t *len_out);

/**
 * `α_j`; zero outside the stored range.
 *
 * # Safety
 * `s` must be a live handle; `re_out` and `im_out` must be writable.
 */
enum CmvStatus cmv_sequence_alpha(const struct CmvSequence *s,
                                  int64_t j,
                                  double *re_out,
                                  double *im_out);

/**
 * `a_j(0)` recorded by inverse scattering for `j = lo..=lo+len`.
 * Fails with `InvalidInput` when the sequence carries none at `j`.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum CmvStatus cmv_sequence_a0(const struct CmvSequence *s, int64_t j, double *out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void cmv_sequence_free(struct CmvSequence *s);

/**
 * Inverse scattering: `α_j` for `j = -levels..=levels`. `cfg` may be null for defaults.
 *
 * # Safety
 * `r` must be a live handle, `cfg` null or readable, `out` writable.
 */
enum CmvStatus cmv_inverse(const struct CmvScattering *r,
                           const struct CmvConfig *cfg,
                           struct CmvSequence **out);

/**
 * Evaluates the harmonic extension of `R` at `n` points inside the unit disk.
 *
 * # Safety
 * Input arrays must hold `n` elements, output arrays room for `n`.
 */
enum CmvStatus cmv_direct(const struct CmvSequence *s,
                          const struct CmvConfig *cfg,
                          const double *z_re,
                          const double *z_im,
                          size_t n,
                          double *re_out,
                          double *im_out);

/**
 * Boundary values of `R` at the `grid_size` grid nodes.
 *
 * # Safety
 * Output arrays must have room for `grid_size` elements.
 */
enum CmvStatus cmv_boundary_values(const struct CmvSequence *s,
                                   const struct CmvConfig *cfg,
                                   size_t grid_size,
                                   double *re_out,
                                   double *im_out);

/**
 * Inverse followed by direct scattering; writes the sup-norm boundary error
 * at the base parameters and whether it does not grow under one doubling.
 *
 * # Safety
 * `r` must be a live handle, `cfg` null or readable, the outputs writable.
 */
enum CmvStatus cmv_roundtrip(const struct CmvScattering *r,
                             const struct CmvConfig *cfg,
                             double *sup_error_out,
                             bool *non_increasing_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CMV_SCATTER_H */
