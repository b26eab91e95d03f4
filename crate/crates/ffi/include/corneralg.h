#ifndef CORNERALG_H
#define CORNERALG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum CaStatus {
  CA_STATUS_OK = 0,
  /**
   * Malformed input, shape mismatch, null pointer, or not an algebra.
   */
  CA_STATUS_INVALID_INPUT = 1,
  /**
   * A numerical routine failed to converge or met a singular matrix.
   */
  CA_STATUS_NUMERICAL = 2,
  /**
   * Structural and empirical checks disagreed.
   */
  CA_STATUS_INCONSISTENT = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  CA_STATUS_INTERNAL = 4,
} CaStatus;

/**
 * Opaque unital or non-unital subalgebra of M_n.
 */
typedef struct CaAlgebra CaAlgebra;

/**
 * Opaque classification verdict.
 */
typedef struct CaVerdict CaVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *ca_last_error(void);

/**
 * Parses an algebra file (JSON text).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CaStatus ca_algebra_from_json(const char *json, struct CaAlgebra **out);

/**
 * Span of `count` matrices of size n x n given as interleaved (re, im)
 * doubles in row-major order, `count * n * n * 2` values in total.
 *
 * # Safety
 * `data` must point to that many doubles; `out` must be writable.
 */
enum CaStatus ca_algebra_from_basis(size_t n,
                                    size_t count,
                                    const double *data,
                                    struct CaAlgebra **out);

/**
 * Canonical family instance. `ranks` points to three values or is NULL for
 * families without ranks; `t_re`, `t_im` are read for AT only.
 *
 * # Safety
 * `tag` must be NUL-terminated; `ranks` NULL or three readable values.
 */
enum CaStatus ca_family_make(const char *tag,
                             size_t n,
                             const size_t *ranks,
                             double t_re,
                             double t_im,
                             struct CaAlgebra **out);

/**
 * Writes n and the dimension of the algebra.
 *
 * # Safety
 * `alg` must be a live handle; `n` and `dim` writable or NULL.
 */
enum CaStatus ca_algebra_shape(const struct CaAlgebra *alg, size_t *n, size_t *dim);

/**
 * Classifies a unital algebra with n >= 4.
 *
 * # Safety
 * `alg` must be a live handle; `out` writable.
 */
enum CaStatus ca_classify(const struct CaAlgebra *alg, uint64_t seed, struct CaVerdict **out);

/**
 * Whether the verdict says compressible.
 *
 * # Safety
 * `verdict` must be a live handle; `out` writable.
 */
enum CaStatus ca_verdict_compressible(const struct CaVerdict *verdict, bool *out);

/**
 * Replays the verdict's certificate against the algebra.
 *
 * # Safety
 * Both handles must be live; `out` writable.
 */
enum CaStatus ca_certify(const struct CaAlgebra *alg, const struct CaVerdict *verdict, bool *out);

/**
 * JSON form of the verdict; free with `ca_string_free`.
 *
 * # Safety
 * `verdict` must be a live handle; `out` writable.
 */
enum CaStatus ca_verdict_to_json(const struct CaVerdict *verdict, char **out);

/**
 * Corner-closure check. `mode` is 0 for projections, 1 for idempotents.
 * Writes the violation count and, when `report` is not NULL, the JSON
 * report (free with `ca_string_free`).
 *
 * # Safety
 * `alg` must be a live handle; `violations` writable; `report` NULL or writable.
 */
enum CaStatus ca_check(const struct CaAlgebra *alg,
                       uint32_t mode,
                       size_t trials,
                       uint64_t seed,
                       size_t *violations,
                       char **report);

/**
 * # Safety
 * `s` must come from this library or be NULL.
 */
void ca_string_free(char *s);

/**
 * # Safety
 * `alg` must come from this library or be NULL.
 */
void ca_algebra_free(struct CaAlgebra *alg);

/**
 * # Safety
 * `verdict` must come from this library or be NULL.
 */
void ca_verdict_free(struct CaVerdict *verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CORNERALG_H */
