#ifndef BELTRAMI_H
#define BELTRAMI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BtStatus {
  BtStatus_Ok = 0,
  BtStatus_NullPointer = 1,
  BtStatus_InvalidArgument = 2,
  BtStatus_Domain = 3,
  BtStatus_Io = 4,
  BtStatus_Parse = 5,
  BtStatus_Precondition = 6,
  BtStatus_Internal = 7,
} BtStatus;

/**
 * A Beltrami field on the unit sphere of ℝ⁴.
 */
typedef struct BtS3Field BtS3Field;

/**
 * A Beltrami field on the 2π-periodic torus.
 */
typedef struct BtT3Field BtT3Field;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call on the thread.
 */
const char *bt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bt_version(void);

/**
 * Frees a string returned by a `_to_json` call. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void bt_string_free(char *s);

/**
 * Builds a field from `n` unit-vector centers (4 doubles each) and weights
 * (3 doubles each) at harmonic degree `degree`.
 *
 * # Safety
 * `centers` and `weights` must hold 4n and 3n doubles; `out` must be writable.
 */
enum BtStatus bt_s3_field_new(uint32_t degree,
                              const double *centers,
                              const double *weights,
                              uintptr_t n,
                              struct BtS3Field **out);

/**
 * Parses an `s3_beltrami` descriptor.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BtStatus bt_s3_field_from_json(const char *json, struct BtS3Field **out);

/**
 * Reads an `s3_beltrami` descriptor file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BtStatus bt_s3_field_load(const char *path, struct BtS3Field **out);

/**
 * # Safety
 * `field` must come from this library and not be freed twice. NULL is ignored.
 */
void bt_s3_field_free(struct BtS3Field *field);

/**
 * Serializes the field as a descriptor; free the result with `bt_string_free`.
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_s3_field_to_json(const struct BtS3Field *field, char **out);

/**
 * Ambient tangent vector of the field at the unit vector `p`.
 *
 * # Safety
 * `p` holds 4 doubles, `out` room for 4.
 */
enum BtStatus bt_s3_field_eval(const struct BtS3Field *field, const double *p, double *out);

/**
 * Closed-form curl at `p`, equal to `eigenvalue · eval` up to rounding.
 *
 * # Safety
 * `p` holds 4 doubles, `out` room for 4.
 */
enum BtStatus bt_s3_field_curl(const struct BtS3Field *field, const double *p, double *out);

/**
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_s3_field_eigenvalue(const struct BtS3Field *field, double *out);

/**
 * Monte Carlo estimate of ∫u·curl u / ∫|u|² from `nodes` ≥ 10⁴ uniform points.
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_s3_helicity_ratio(const struct BtS3Field *field,
                                   uintptr_t nodes,
                                   uint64_t seed,
                                   double *out);

/**
 * Parses a `t3_beltrami` descriptor; modes are checked against the eigen and divergence identities.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BtStatus bt_t3_field_from_json(const char *json, struct BtT3Field **out);

/**
 * Reads a `t3_beltrami` descriptor file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BtStatus bt_t3_field_load(const char *path, struct BtT3Field **out);

/**
 * # Safety
 * `field` must come from this library and not be freed twice. NULL is ignored.
 */
void bt_t3_field_free(struct BtT3Field *field);

/**
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_t3_field_to_json(const struct BtT3Field *field, char **out);

/**
 * Real field value at `x` (any real coordinates; the field is 2π-periodic).
 *
 * # Safety
 * `x` holds 3 doubles, `out` room for 3.
 */
enum BtStatus bt_t3_field_eval(const struct BtT3Field *field, const double *x, double *out);

/**
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_t3_field_eigenvalue(const struct BtT3Field *field, double *out);

/**
 * Number of stored Fourier modes (conjugate pairs count twice).
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_t3_field_mode_count(const struct BtT3Field *field, uintptr_t *out);

/**
 * Exact helicity ratio from the Fourier coefficients.
 *
 * # Safety
 * `field` must be a live handle; `out` must be writable.
 */
enum BtStatus bt_t3_helicity_ratio(const struct BtT3Field *field, double *out);

/**
 * Number of integer points k with |k| = lambda.
 *
 * # Safety
 * `out` must be writable.
 */
enum BtStatus bt_lattice_count(uint64_t lambda, uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELTRAMI_H */
