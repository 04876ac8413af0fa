#ifndef FOMOH_H
#define FOMOH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FomohStatus {
  FOMOH_STATUS_OK = 0,
  FOMOH_STATUS_NULL_POINTER = 1,
  FOMOH_STATUS_INVALID_ARGUMENT = 2,
  FOMOH_STATUS_DOMAIN = 3,
  FOMOH_STATUS_SINGULAR = 4,
  FOMOH_STATUS_PANIC = 5,
} FomohStatus;

typedef enum FomohPrimitive {
  FOMOH_PRIMITIVE_NEG = 0,
  FOMOH_PRIMITIVE_RECIP = 1,
  FOMOH_PRIMITIVE_EXP = 2,
  FOMOH_PRIMITIVE_LOG = 3,
  FOMOH_PRIMITIVE_SQRT = 4,
  FOMOH_PRIMITIVE_TANH = 5,
  FOMOH_PRIMITIVE_SIGMOID = 6,
  FOMOH_PRIMITIVE_RELU = 7,
  FOMOH_PRIMITIVE_ABS = 8,
  FOMOH_PRIMITIVE_SIN = 9,
  FOMOH_PRIMITIVE_COS = 10,
} FomohPrimitive;

typedef enum FomohMethod {
  FOMOH_METHOD_FGD = 0,
  FOMOH_METHOD_FOMOH = 1,
  FOMOH_METHOD_FOMOH_BP = 2,
  FOMOH_METHOD_FOMOH_KD = 3,
  FOMOH_METHOD_SGD = 4,
  FOMOH_METHOD_NEWTON = 5,
} FomohMethod;

/**
 * Opaque objective handle.
 */
typedef struct FomohObjective FomohObjective;

/**
 * Opaque optimizer handle.
 */
typedef struct FomohOptimizer FomohOptimizer;

/**
 * `re + e1 ε₁ + e2 ε₂ + e12 ε₁ε₂`
 */
typedef struct FomohHyperDual {
  double re;
  double e1;
  double e2;
  double e12;
} FomohHyperDual;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on this thread.
 */
const char *fomoh_last_error_message(void);

/**
 * Seed a hyper-dual number `re + v1 ε₁ + v2 ε₂`.
 */
struct FomohHyperDual fomoh_hd_seed(double re, double v1, double v2);

struct FomohHyperDual fomoh_hd_add(struct FomohHyperDual a, struct FomohHyperDual b);

struct FomohHyperDual fomoh_hd_sub(struct FomohHyperDual a, struct FomohHyperDual b);

struct FomohHyperDual fomoh_hd_mul(struct FomohHyperDual a, struct FomohHyperDual b);

/**
 * # Safety
 * `out` must be null or valid for a write of one `FomohHyperDual`.
 */
enum FomohStatus fomoh_hd_div(struct FomohHyperDual a,
                              struct FomohHyperDual b,
                              struct FomohHyperDual *out);

/**
 * Apply an elementary function.
 *
 * # Safety
 * `out` must be null or valid for a write of one `FomohHyperDual`.
 */
enum FomohStatus fomoh_hd_apply(enum FomohPrimitive p,
                                struct FomohHyperDual x,
                                struct FomohHyperDual *out);

/**
 * `x^c` for a constant exponent.
 *
 * # Safety
 * `out` must be null or valid for a write of one `FomohHyperDual`.
 */
enum FomohStatus fomoh_hd_powf(struct FomohHyperDual x, double c, struct FomohHyperDual *out);

/**
 * Create the `dim`-dimensional Rosenbrock function.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum FomohStatus fomoh_rosenbrock_new(size_t dim, struct FomohObjective **out);

/**
 * Create `½ θᵀAθ + bᵀθ` from a row-major symmetric `dim × dim` matrix `a`
 * and a length-`dim` vector `b`.
 *
 * # Safety
 * `a` must point to `dim * dim` doubles, `b` to `dim` doubles, and `out`
 * must be null or valid for a pointer write.
 */
enum FomohStatus fomoh_quadratic_new(size_t dim,
                                     const double *a,
                                     const double *b,
                                     struct FomohObjective **out);

/**
 * # Safety
 * `f` must be null or a handle from a `fomoh_*_new` objective constructor
 * that has not been freed.
 */
void fomoh_objective_free(struct FomohObjective *f);

/**
 * Parameter dimension, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live objective handle.
 */
size_t fomoh_objective_dim(const struct FomohObjective *f);

/**
 * # Safety
 * `f` must be a live objective handle, `theta` must point to `dim` doubles
 * and `out` must be valid for one write.
 */
enum FomohStatus fomoh_objective_value(const struct FomohObjective *f,
                                       const double *theta,
                                       double *out);

/**
 * Value and reverse-mode gradient; `grad` receives `dim` doubles.
 *
 * # Safety
 * `f` must be a live objective handle, `theta` and `grad` must point to
 * `dim` doubles and `value` must be valid for one write.
 */
enum FomohStatus fomoh_objective_gradient(const struct FomohObjective *f,
                                          const double *theta,
                                          double *value,
                                          double *grad);

/**
 * One hyper-dual evaluation along tangents `v1` and `v2`, giving the value,
 * both directional derivatives and `v1ᵀ∇²f v2`.
 *
 * # Safety
 * `f` must be a live objective handle, `theta`, `v1` and `v2` must point to
 * `dim` doubles and `out` must be valid for one write.
 */
enum FomohStatus fomoh_objective_eval_hd(const struct FomohObjective *f,
                                         const double *theta,
                                         const double *v1,
                                         const double *v2,
                                         struct FomohHyperDual *out);

/**
 * Dense Hessian, row-major into `dim * dim` doubles.
 *
 * # Safety
 * `f` must be a live objective handle, `theta` must point to `dim` doubles
 * and `hess` to `dim * dim` writable doubles.
 */
enum FomohStatus fomoh_objective_hessian(const struct FomohObjective *f,
                                         const double *theta,
                                         double *hess);

/**
 * Create an optimizer. `k` is the hyperplane dimension for
 * `FOMOH_METHOD_FOMOH_KD` and ignored otherwise; `seed` drives tangent
 * sampling.
 *
 * # Safety
 * `out` must be null or valid for a pointer write.
 */
enum FomohStatus fomoh_optimizer_new(enum FomohMethod method,
                                     double eta,
                                     size_t k,
                                     uint64_t seed,
                                     struct FomohOptimizer **out);

/**
 * # Safety
 * `opt` must be null or a live optimizer handle.
 */
void fomoh_optimizer_free(struct FomohOptimizer *opt);

/**
 * Apply one update to `theta` in place. `loss_before`, if non-null,
 * receives the loss at the incoming point.
 *
 * # Safety
 * `opt` and `f` must be live handles, `theta` must point to `dim` writable
 * doubles and `loss_before` must be null or valid for one write.
 */
enum FomohStatus fomoh_optimizer_step(struct FomohOptimizer *opt,
                                      const struct FomohObjective *f,
                                      double *theta,
                                      double *loss_before);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOMOH_H */
