#ifndef MONOGENIC_H
#define MONOGENIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define MG_OK 0

#define MG_NULL_POINTER 1

#define MG_DOMAIN_ERROR 2

#define MG_REJECTED 3

#define MG_INVALID_ARGUMENT 4

#define MG_INTERNAL_ERROR 5

#define MG_METHOD_MONTE_CARLO 0

#define MG_METHOD_LAYERED_GRID 1

#define MG_LIMIT_FINITE 0

#define MG_LIMIT_INFINITE 1

#define MG_LIMIT_DIVERGENT 2

#define MG_LIMIT_INCONCLUSIVE 3

/**
 * Opaque octonion-valued field.
 */
typedef struct MgField MgField;

typedef struct MgAreaResult {
  double total;
  double per_component[8];
  double stderr;
  uint64_t budget_used;
  /**
   * Non-zero when the error estimate exceeded the tolerance.
   */
  int32_t flagged;
} MgAreaResult;

typedef struct MgLimitResult {
  /**
   * One of `MG_LIMIT_*`.
   */
  int32_t status;
  /**
   * Limit values; meaningful only when `status == MG_LIMIT_FINITE`.
   */
  double value[8];
  int32_t component_status[8];
  double scale;
  double tail_oscillation;
} MgLimitResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (always
 * nul-terminated when `len > 0`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t mg_last_error(char *buf, uintptr_t len);

/**
 * Library version as a static nul-terminated string.
 */
const char *mg_version(void);

/**
 * Constant field `sum c_j e_j`.
 *
 * # Safety
 * `coeffs` must point to 8 doubles; `out` must be writable.
 */
int32_t mg_field_constant(const double *coeffs, struct MgField **out);

/**
 * `weight` times the lift of the Newton kernel `|x - pole|^-6`; the pole
 * must satisfy `pole[0] <= 0`.
 *
 * # Safety
 * `pole` must point to 8 doubles; `out` must be writable.
 */
int32_t mg_field_newton_lift(const double *pole, double weight, struct MgField **out);

/**
 * The non-monogenic test fixture `sum x_j e_j`.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t mg_field_identity_fixture(struct MgField **out);

/**
 * Adds `weight` times a Newton-kernel lift to an existing field.
 *
 * # Safety
 * `field` must come from an `mg_field_*` constructor; `pole` must point to 8 doubles.
 */
int32_t mg_field_add_newton_lift(struct MgField *field, const double *pole, double weight);

/**
 * Releases a field. Null is ignored.
 *
 * # Safety
 * `field` must be null or come from an `mg_field_*` constructor, and must
 * not be used afterwards.
 */
void mg_field_free(struct MgField *field);

/**
 * `f(x)` at `x = (x0, ..., x7)`.
 *
 * # Safety
 * Pointers must be valid for 8 doubles.
 */
int32_t mg_field_eval(const struct MgField *field, const double *x, double *out);

/**
 * Jacobian in row-major order: `out[8 j + k] = d f_j / d x_k`.
 *
 * # Safety
 * `x` must point to 8 doubles and `out` to 64.
 */
int32_t mg_field_jacobian(const struct MgField *field, const double *x, double *out);

/**
 * `D[f](x)` at an interior point (`x0 > 0`).
 *
 * # Safety
 * Pointers must be valid for 8 doubles.
 */
int32_t mg_dirac_residual(const struct MgField *field, const double *x, double *out);

/**
 * Area integral over the cone `|Y - X| < alpha x0`, `eps0 < x0 < h`.
 * `method` is one of `MG_METHOD_*`; `seed` is ignored by the grid.
 *
 * # Safety
 * `vertex` must point to 7 doubles; `out` must be writable.
 */
int32_t mg_area_integral(const struct MgField *field,
                         const double *vertex,
                         double alpha,
                         double h,
                         int32_t method,
                         uint64_t budget,
                         uint64_t seed,
                         double eps0,
                         struct MgAreaResult *out);

/**
 * Normal limit of `f` at the boundary point `(0, y)` with default heights
 * and tail criterion.
 *
 * # Safety
 * `y` must point to 7 doubles; `out` must be writable.
 */
int32_t mg_normal_limit(const struct MgField *field, const double *y, struct MgLimitResult *out);

/**
 * Half-space Poisson kernel `P(x0, x)` for `x0 > 0`.
 *
 * # Safety
 * `x` must point to 7 doubles; `out` must be writable.
 */
int32_t mg_poisson_kernel(double x0, const double *x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONOGENIC_H */
