#ifndef SPINOR_TF_H
#define SPINOR_TF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpinorRegime {
  SpinorRegime_NsMs = 0,
  SpinorRegime_Ns2c = 1,
  SpinorRegime_Pure2c = 2,
  SpinorRegime_MsMs = 3,
  SpinorRegime_Pure3c = 4,
  SpinorRegime_FerroQ0Degenerate = 5,
  SpinorRegime_Alpha0Q0 = 6,
  SpinorRegime_Alpha0QPos = 7,
  SpinorRegime_Alpha0QNeg = 8,
} SpinorRegime;

typedef enum SpinorStatus {
  SpinorStatus_Ok = 0,
  SpinorStatus_NullPointer = 1,
  SpinorStatus_InvalidArgument = 2,
  SpinorStatus_RegimeMismatch = 3,
  SpinorStatus_Degenerate = 4,
  SpinorStatus_Numerical = 5,
  SpinorStatus_Panic = 6,
} SpinorStatus;

/**
 * Calibrated bulk potential W.
 */
typedef struct SpinorPotential SpinorPotential;

/**
 * Parameters together with their Thomas-Fermi solution.
 */
typedef struct SpinorSolution SpinorSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *spinor_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next library call on the same thread.
 */
const char *spinor_last_error(void);

/**
 * Tag of a regime ("NS_MS", "MS_MS", ...) as a static string.
 */
const char *spinor_regime_name(enum SpinorRegime regime);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum SpinorStatus spinor_critical_q1(double alpha, double n, double m, double *out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum SpinorStatus spinor_critical_q2(double alpha, double n, double m, double *out);

/**
 * # Safety
 * `out` must be valid for one write.
 */
enum SpinorStatus spinor_classify(double alpha,
                                  double q,
                                  double n,
                                  double m,
                                  enum SpinorRegime *out);

/**
 * Solve the Thomas-Fermi problem; on success `*out` owns a new handle.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SpinorStatus spinor_solution_new(double alpha,
                                      double q,
                                      double n,
                                      double m,
                                      struct SpinorSolution **out);

/**
 * # Safety
 * `handle` must come from `spinor_solution_new` and not be used afterwards. NULL is ignored.
 */
void spinor_solution_free(struct SpinorSolution *handle);

/**
 * # Safety
 * `handle` must be a live solution handle; `regime`, `r` and `e0` valid for one write each.
 */
enum SpinorStatus spinor_solution_info(const struct SpinorSolution *handle,
                                       enum SpinorRegime *regime,
                                       double *r,
                                       double *e0);

/**
 * Write well `which` (0 for a, 1 for b) as (u₁, u₀, u₋₁) into `out[0..3]`.
 *
 * # Safety
 * `handle` must be a live solution handle and `out` valid for three writes.
 */
enum SpinorStatus spinor_solution_state(const struct SpinorSolution *handle,
                                        uint32_t which,
                                        double *out);

/**
 * Mass and magnetization residuals of the solution.
 *
 * # Safety
 * `handle` must be a live solution handle; `mass` and `mag` valid for one write each.
 */
enum SpinorStatus spinor_solution_residuals(const struct SpinorSolution *handle,
                                            double *mass,
                                            double *mag);

/**
 * Build the calibrated potential of a solution.
 *
 * # Safety
 * `solution` must be a live solution handle and `out` valid for one write.
 */
enum SpinorStatus spinor_potential_new(const struct SpinorSolution *solution,
                                       struct SpinorPotential **out);

/**
 * # Safety
 * `handle` must come from `spinor_potential_new` and not be used afterwards. NULL is ignored.
 */
void spinor_potential_free(struct SpinorPotential *handle);

/**
 * # Safety
 * `handle` must be a live potential handle, `u` readable for three values, `out` valid for one write.
 */
enum SpinorStatus spinor_potential_eval(const struct SpinorPotential *handle,
                                        const double *u,
                                        double *out);

/**
 * # Safety
 * `handle` must be a live potential handle, `u` readable and `out` writable for three values.
 */
enum SpinorStatus spinor_potential_grad(const struct SpinorPotential *handle,
                                        const double *u,
                                        double *out);

/**
 * Surface tension g(from, to) by the string method with `nodes` path nodes (0 for the default).
 *
 * # Safety
 * `handle` must be a live potential handle, `from` and `to` readable for three values,
 * `out` valid for one write.
 */
enum SpinorStatus spinor_geodesic_cost(const struct SpinorPotential *handle,
                                       const double *from,
                                       const double *to,
                                       uintptr_t nodes,
                                       double *out);

/**
 * Contact angle in radians from g_ab cos θ + g_0a − g_0b = 0.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SpinorStatus spinor_young_angle(double g_ab, double g_0a, double g_0b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINOR_TF_H */
