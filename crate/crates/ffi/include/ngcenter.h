#ifndef NGCENTER_H
#define NGCENTER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum NgStatus {
  NG_STATUS_OK = 0,
  /**
   * A comparison ran and did not match.
   */
  NG_STATUS_MISMATCH = 1,
  /**
   * A pipeline stage failed.
   */
  NG_STATUS_STAGE_FAILURE = 2,
  /**
   * Bad arguments or configuration.
   */
  NG_STATUS_INVALID_ARGUMENT = 3,
  NG_STATUS_NULL_POINTER = 4,
  NG_STATUS_OUT_OF_RANGE = 5,
  NG_STATUS_IO = 6,
  NG_STATUS_PANIC = 7,
} NgStatus;

/**
 * Modular data `(S, T)` of a modular category.
 */
typedef struct NgModularData NgModularData;

/**
 * Outcome of a pipeline run.
 */
typedef struct NgPipeline NgPipeline;

/**
 * Reduced super-modular data `(Ŝ, T̂²)`.
 */
typedef struct NgSuperData NgSuperData;

/**
 * Message of the last failed call on this thread, or null. Owned by the
 * library; valid until the next call.
 */
const char *ng_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ng_string_free(char *s);

/**
 * Solves, assembles and verifies the center of a catalog instance.
 *
 * # Safety
 * `instance` must be a NUL-terminated string; `out` must be writable.
 */
enum NgStatus ng_center_from_instance(const char *instance,
                                      uint32_t omega_order,
                                      struct NgModularData **out);

/**
 * Parses modular data from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum NgStatus ng_modular_from_json(const char *json, struct NgModularData **out);

/**
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void ng_modular_free(struct NgModularData *h);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_modular_rank(const struct NgModularData *h, size_t *out);

/**
 * Global dimension `λ = √Σ d²`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_modular_lambda(const struct NgModularData *h, double *out);

/**
 * Dimension and twist `(re, im)` of simple `i`.
 *
 * # Safety
 * `h` must be a live handle; the three outputs must be writable.
 */
enum NgStatus ng_modular_simple(const struct NgModularData *h,
                                size_t i,
                                double *dim,
                                double *twist_re,
                                double *twist_im);

/**
 * Entry `S_{ij}` of the normalized S-matrix.
 *
 * # Safety
 * `h` must be a live handle; `re` and `im` must be writable.
 */
enum NgStatus ng_modular_s(const struct NgModularData *h,
                           size_t i,
                           size_t j,
                           double *re,
                           double *im);

/**
 * Label of simple `i` as a new string.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_modular_label(const struct NgModularData *h, size_t i, char **out);

/**
 * JSON form as a new string.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_modular_to_json(const struct NgModularData *h, char **out);

/**
 * Runs the pipeline on a catalog instance through `through` (a stage name
 * such as `"supermodular"`), optionally comparing with `compare`
 * (`"smds1"`, `"smds2"` or null). Returns [`NgStatus::Mismatch`] with a
 * valid handle when the comparison fails.
 *
 * # Safety
 * `instance` and `through` must be NUL-terminated strings, `compare` null
 * or NUL-terminated; `out` must be writable.
 */
enum NgStatus ng_pipeline_run(const char *instance,
                              const char *through,
                              const char *compare,
                              bool allow_conjugation,
                              struct NgPipeline **out);

/**
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void ng_pipeline_free(struct NgPipeline *h);

/**
 * Number of `(ξ, τ, ω)` triples found.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_pipeline_triple_count(const struct NgPipeline *h, size_t *out);

/**
 * Comparison outcome. `InvalidArgument` when no comparison ran.
 *
 * # Safety
 * `h` must be a live handle; the outputs must be writable.
 */
enum NgStatus ng_pipeline_comparison(const struct NgPipeline *h,
                                     bool *matched,
                                     bool *conjugated,
                                     double *max_deviation);

/**
 * Copies out the center's data as a new handle.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_pipeline_center(const struct NgPipeline *h, struct NgModularData **out);

/**
 * Copies out the super-modular data as a new handle.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_pipeline_super(const struct NgPipeline *h, struct NgSuperData **out);

/**
 * # Safety
 * `h` must be null or a handle from this library not yet freed.
 */
void ng_super_free(struct NgSuperData *h);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_super_rank(const struct NgSuperData *h, size_t *out);

/**
 * Entry `Ŝ_{ij}`.
 *
 * # Safety
 * `h` must be a live handle; `re` and `im` must be writable.
 */
enum NgStatus ng_super_s(const struct NgSuperData *h, size_t i, size_t j, double *re, double *im);

/**
 * Entry `T̂²_i`.
 *
 * # Safety
 * `h` must be a live handle; `re` and `im` must be writable.
 */
enum NgStatus ng_super_t2(const struct NgSuperData *h, size_t i, double *re, double *im);

/**
 * JSON form as a new string.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum NgStatus ng_super_to_json(const struct NgSuperData *h, char **out);

#endif  /* NGCENTER_H */
