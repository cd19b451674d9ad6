#ifndef BLOCKSPEC_H
#define BLOCKSPEC_H

/* Generated by cbindgen from blockspec-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum BspStatus {
  BSP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  BSP_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or inconsistent.
   */
  BSP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The model parameters violate an invariant.
   */
  BSP_STATUS_INVALID_MODEL = 3,
  /**
   * No part count satisfied the residual threshold.
   */
  BSP_STATUS_NO_K_FOUND = 4,
  /**
   * Text input could not be parsed.
   */
  BSP_STATUS_PARSE_ERROR = 5,
  /**
   * An unexpected internal failure.
   */
  BSP_STATUS_INTERNAL_ERROR = 6,
} BspStatus;

/**
 * Clustering feature choice.
 */
typedef enum BspMode {
  BSP_MODE_ROWS = 0,
  BSP_MODE_COLUMNS = 1,
  BSP_MODE_NEITHER = 2,
} BspMode;

/**
 * Opaque handle: validated model parameters.
 */
typedef struct BspParams BspParams;

/**
 * Opaque handle: a realized graph sample.
 */
typedef struct BspSample BspSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static C string.
 */
const char *bsp_version(void);

/**
 * Parses model parameters from TOML text (keys `k`, `rho`, `modalities`,
 * `directed`).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On `Ok` the caller owns the handle and must release it with
 * [`bsp_params_free`].
 */
enum BspStatus bsp_params_parse_toml(const char *text, struct BspParams **out);

/**
 * Builds model parameters from raw buffers.
 *
 * `rho` has `k` entries; `modalities` holds `num_modalities` row-major
 * `k x k` matrices back to back.
 *
 * # Safety
 * The buffers must be readable at the stated lengths and `out` must be a
 * valid pointer. On `Ok` the caller owns the handle.
 */
enum BspStatus bsp_params_new(size_t k,
                              const double *rho,
                              size_t num_modalities,
                              const double *modalities,
                              bool directed,
                              struct BspParams **out);

/**
 * Releases a parameters handle.
 *
 * # Safety
 * `params` must come from this library and not have been freed already;
 * null is ignored.
 */
void bsp_params_free(struct BspParams *params);

/**
 * Number of blocks; zero for a null handle.
 *
 * # Safety
 * `params` must be a live handle or null.
 */
size_t bsp_params_k(const struct BspParams *params);

/**
 * Number of modalities; zero for a null handle.
 *
 * # Safety
 * `params` must be a live handle or null.
 */
size_t bsp_params_num_modalities(const struct BspParams *params);

/**
 * Samples a graph of `n` vertices.
 *
 * # Safety
 * `params` must be a live handle; `out` must be valid. On `Ok` the caller
 * owns the sample handle and must release it with [`bsp_sample_free`].
 */
enum BspStatus bsp_sample_generate(const struct BspParams *params,
                                   size_t n,
                                   uint64_t seed_value,
                                   uint64_t seed_stream,
                                   struct BspSample **out);

/**
 * Releases a sample handle.
 *
 * # Safety
 * `sample` must come from this library and not have been freed already;
 * null is ignored.
 */
void bsp_sample_free(struct BspSample *sample);

/**
 * Number of vertices; zero for a null handle.
 *
 * # Safety
 * `sample` must be a live handle or null.
 */
size_t bsp_sample_n(const struct BspSample *sample);

/**
 * Copies the realized block memberships into `out` (`n` entries).
 *
 * # Safety
 * `out` must be writable for `bsp_sample_n(sample)` entries.
 */
enum BspStatus bsp_sample_tau(const struct BspSample *sample, size_t *out);

/**
 * Copies one adjacency matrix into `out` (`n * n` entries, row-major 0/1).
 *
 * # Safety
 * `out` must be writable for `n * n` bytes.
 */
enum BspStatus bsp_sample_adjacency(const struct BspSample *sample, size_t modality, uint8_t *out);

/**
 * Partitions the sample into `k` blocks; writes one 0-based label per
 * vertex into `labels_out`.
 *
 * # Safety
 * `labels_out` must be writable for `bsp_sample_n(sample)` entries.
 */
enum BspStatus bsp_partition(const struct BspSample *sample,
                             size_t r,
                             enum BspMode mode,
                             size_t k,
                             size_t restarts,
                             uint64_t seed_value,
                             uint64_t seed_stream,
                             size_t *labels_out);

/**
 * Residual-threshold estimate of the number of blocks.
 *
 * `k_max = 0` selects the default cap `min(2 * R_total + 2, n)`.
 *
 * # Safety
 * `k_out` must be a valid pointer.
 */
enum BspStatus bsp_select_k_hat(const struct BspSample *sample,
                                size_t r,
                                enum BspMode mode,
                                double xi,
                                size_t k_max,
                                size_t restarts,
                                uint64_t seed_value,
                                uint64_t seed_stream,
                                size_t *k_out);

/**
 * Part-size/centroid-separation estimate of the number of blocks; writes
 * zero when no part count qualifies.
 *
 * # Safety
 * `k_out` must be a valid pointer.
 */
enum BspStatus bsp_select_k_check(const struct BspSample *sample,
                                  size_t r,
                                  enum BspMode mode,
                                  double zeta,
                                  double theta,
                                  size_t restarts,
                                  uint64_t seed_value,
                                  uint64_t seed_stream,
                                  size_t *k_out);

/**
 * Minimum number of label disagreements over bijections of the label sets.
 *
 * # Safety
 * `tau` and `tau_hat` must be readable for `n` entries each; `out` must be
 * a valid pointer.
 */
enum BspStatus bsp_misassignment_count(const size_t *tau,
                                       const size_t *tau_hat,
                                       size_t n,
                                       size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOCKSPEC_H */
