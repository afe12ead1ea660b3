#ifndef ISOELAST_H
#define ISOELAST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsoelastFormulation {
  /**
   * Use the formulation the case was built for.
   */
  ISOELAST_FORMULATION_DEFAULT = 0,
  ISOELAST_FORMULATION_WEAK = 1,
  ISOELAST_FORMULATION_STRONG = 2,
} IsoelastFormulation;

typedef enum IsoelastStatus {
  ISOELAST_STATUS_OK = 0,
  ISOELAST_STATUS_NULL_POINTER = 1,
  ISOELAST_STATUS_INVALID_ARGUMENT = 2,
  ISOELAST_STATUS_UNKNOWN_CASE = 3,
  ISOELAST_STATUS_UNSUPPORTED = 4,
  ISOELAST_STATUS_SINGULAR = 5,
  ISOELAST_STATUS_GEOMETRY = 6,
  ISOELAST_STATUS_IO = 7,
  ISOELAST_STATUS_PANIC = 8,
} IsoelastStatus;

/**
 * Opaque manufactured case.
 */
typedef struct IsoelastCase IsoelastCase;

/**
 * Opaque solved mesh level.
 */
typedef struct IsoelastSolution IsoelastSolution;

/**
 * Field values at one point; `sigma` is row major.
 */
typedef struct IsoelastPointValues {
  double x[2];
  double sigma[4];
  double div_sigma[2];
  double u[2];
  /**
   * Multiplier scalar; zero for the strong formulation.
   */
  double q;
} IsoelastPointValues;

typedef struct IsoelastErrors {
  double sigma_l2;
  double div_sigma_l2;
  double sigma_hdiv;
  double u_l2;
  double p_l2;
  double max_asymmetry;
} IsoelastErrors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a successful call. The
 * pointer stays valid until the next call on the same thread.
 */
const char *isoelast_last_error(void);

/**
 * Library version as a static string.
 */
const char *isoelast_version(void);

/**
 * Build a built-in case. Non-positive `lambda` or `mu` select the case defaults
 * (`lambda` = 0 is therefore not expressible here).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IsoelastStatus isoelast_case_new(const char *name,
                                      double lambda,
                                      double mu,
                                      struct IsoelastCase **out);

/**
 * # Safety
 * `handle` must come from `isoelast_case_new` and not be used afterwards; null is ignored.
 */
void isoelast_case_free(struct IsoelastCase *handle);

/**
 * Number of patches of the case geometry.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid pointer.
 */
enum IsoelastStatus isoelast_case_patches(const struct IsoelastCase *handle, size_t *out);

/**
 * Assemble and solve on a uniform `n` x `n` mesh per patch.
 *
 * # Safety
 * `handle` must be a live handle and `out` a valid pointer.
 */
enum IsoelastStatus isoelast_solve(const struct IsoelastCase *handle,
                                   enum IsoelastFormulation formulation,
                                   size_t degree,
                                   int32_t regularity,
                                   size_t n,
                                   struct IsoelastSolution **out);

/**
 * # Safety
 * `sol` must come from `isoelast_solve` and not be used afterwards; null is ignored.
 */
void isoelast_solution_free(struct IsoelastSolution *sol);

/**
 * Unknown counts (stress, displacement, multiplier) and the relative residual.
 *
 * # Safety
 * `sol` must be a live handle; `dofs` must hold 3 values.
 */
enum IsoelastStatus isoelast_solution_info(const struct IsoelastSolution *sol,
                                           size_t *dofs,
                                           double *residual);

/**
 * Evaluate the discrete fields at parametric point (z1, z2) of a patch.
 *
 * # Safety
 * `sol` must be a live handle and `out` a valid pointer.
 */
enum IsoelastStatus isoelast_solution_eval(const struct IsoelastSolution *sol,
                                           size_t patch,
                                           double z1,
                                           double z2,
                                           struct IsoelastPointValues *out);

/**
 * Error norms against the exact solution of the case behind `handle`.
 *
 * # Safety
 * Both handles must be live, `sol` solved on that case, and `out` a valid pointer.
 */
enum IsoelastStatus isoelast_solution_errors(const struct IsoelastSolution *sol,
                                             const struct IsoelastCase *handle,
                                             struct IsoelastErrors *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOELAST_H */
