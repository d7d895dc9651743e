#ifndef PRDIM_H
#define PRDIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Nonzero values mirror the CLI exit codes where they overlap.
 */
typedef enum PrdimStatus {
  PRDIM_STATUS_OK = 0,
  PRDIM_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: non-finite values, bad weights, bad arguments.
   */
  PRDIM_STATUS_INVALID_INPUT = 2,
  /**
   * A structural precondition failed (too few rows or columns, ...).
   */
  PRDIM_STATUS_PRECONDITION = 3,
  /**
   * The computation could not produce a usable number.
   */
  PRDIM_STATUS_NUMERICAL = 4,
  /**
   * An internal panic was caught.
   */
  PRDIM_STATUS_PANIC = 5,
} PrdimStatus;

typedef enum PrdimCorrection {
  PRDIM_CORRECTION_NAIVE = 0,
  PRDIM_CORRECTION_ROW = 1,
  PRDIM_CORRECTION_COL = 2,
  PRDIM_CORRECTION_BOTH = 3,
} PrdimCorrection;

typedef enum PrdimCentering {
  PRDIM_CENTERING_TASK = 0,
  PRDIM_CENTERING_NEURON = 1,
  PRDIM_CENTERING_NONE = 2,
} PrdimCentering;

typedef enum PrdimModel {
  PRDIM_MODEL_LINEAR = 0,
  PRDIM_MODEL_RFF = 1,
} PrdimModel;

/**
 * Opaque matrix handle.
 */
typedef struct PrdimMatrix PrdimMatrix;

/**
 * Opaque trial-pair handle.
 */
typedef struct PrdimPair PrdimPair;

/**
 * One estimate. `gamma` is NaN when `valid` is false.
 */
typedef struct PrdimEstimate {
  double gamma;
  double a;
  double b;
  double terms[5];
  bool valid;
  bool noise_corrected;
} PrdimEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies a row-major `rows x cols` array into a new matrix handle.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `out` must be writable.
 */
enum PrdimStatus prdim_matrix_new(const double *data,
                                  size_t rows,
                                  size_t cols,
                                  struct PrdimMatrix **out);

/**
 * Releases a matrix handle. Null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void prdim_matrix_free(struct PrdimMatrix *m);

/**
 * # Safety
 * `m` must be a live handle; `rows` and `cols` must be writable.
 */
enum PrdimStatus prdim_matrix_shape(const struct PrdimMatrix *m, size_t *rows, size_t *cols);

/**
 * Copies the entries in row-major order into `out`, which holds `len` doubles.
 *
 * # Safety
 * `m` must be a live handle and `out` must point to `len` writable doubles.
 */
enum PrdimStatus prdim_matrix_copy(const struct PrdimMatrix *m, double *out, size_t len);

/**
 * Builds a trial pair from copies of two equally shaped matrices.
 *
 * # Safety
 * `trial1` and `trial2` must be live handles and `out` must be writable.
 */
enum PrdimStatus prdim_pair_new(const struct PrdimMatrix *trial1,
                                const struct PrdimMatrix *trial2,
                                bool symmetrize,
                                struct PrdimPair **out);

/**
 * Releases a pair handle. Null is ignored.
 *
 * # Safety
 * `p` must be null or a handle from this library not yet freed.
 */
void prdim_pair_free(struct PrdimPair *p);

/**
 * Estimates the dimensionality of one matrix. `weights` may be null; when
 * given it holds one nonnegative weight per row.
 *
 * # Safety
 * `m` must be a live handle, `weights` null or `weights_len` readable
 * doubles, and `out` writable.
 */
enum PrdimStatus prdim_estimate(const struct PrdimMatrix *m,
                                enum PrdimCorrection correction,
                                enum PrdimCentering centering,
                                const double *weights,
                                size_t weights_len,
                                struct PrdimEstimate *out);

/**
 * Noise-corrected estimate from a trial pair.
 *
 * # Safety
 * Same contract as [`prdim_estimate`] with a pair handle.
 */
enum PrdimStatus prdim_estimate_pair(const struct PrdimPair *p,
                                     enum PrdimCorrection correction,
                                     enum PrdimCentering centering,
                                     const double *weights,
                                     size_t weights_len,
                                     struct PrdimEstimate *out);

/**
 * Draws one synthetic matrix. `input_scale` is used by the RFF model only.
 *
 * # Safety
 * `out` must be writable.
 */
enum PrdimStatus prdim_generate(enum PrdimModel model,
                                size_t latent_dim,
                                double input_scale,
                                double noise_std,
                                size_t rows,
                                size_t cols,
                                uint64_t seed,
                                struct PrdimMatrix **out);

/**
 * Draws two trials sharing one signal, with independent noise.
 *
 * # Safety
 * `out` must be writable.
 */
enum PrdimStatus prdim_generate_pair(enum PrdimModel model,
                                     size_t latent_dim,
                                     double input_scale,
                                     double noise_std,
                                     size_t rows,
                                     size_t cols,
                                     uint64_t seed,
                                     struct PrdimPair **out);

/**
 * TwoNN intrinsic-dimension estimate of the rows of `m`.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum PrdimStatus prdim_twonn(const struct PrdimMatrix *m, double *out);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len` bytes, into `buf`. Returns the full message length
 * excluding the terminator; an empty message means the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t prdim_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PRDIM_H */
