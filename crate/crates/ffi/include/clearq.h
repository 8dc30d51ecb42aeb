#ifndef CLEARQ_H
#define CLEARQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClearqCase {
  CLEARQ_CASE_A = 0,
  CLEARQ_CASE_B = 1,
  CLEARQ_CASE_C = 2,
} ClearqCase;

typedef enum ClearqStatus {
  CLEARQ_STATUS_OK = 0,
  CLEARQ_STATUS_NULL_POINTER = 1,
  CLEARQ_STATUS_INVALID_INPUT = 2,
  CLEARQ_STATUS_UNREACHABLE_STATE = 3,
  CLEARQ_STATUS_UNSUPPORTED = 4,
  CLEARQ_STATUS_NUMERICAL = 5,
  CLEARQ_STATUS_OUT_OF_RANGE = 6,
  CLEARQ_STATUS_PANIC = 7,
} ClearqStatus;

/*
 Opaque model handle.
 */
typedef struct ClearqModel ClearqModel;

/*
 Opaque equilibrium report handle.
 */
typedef struct ClearqReport ClearqReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread, or NULL. Valid
 until the next library call on the same thread.
 */
const char *clearq_last_error(void);

/*
 Build a model from rates and the reward/cost pair.

 # Safety
 `out` must be a valid pointer.
 */
enum ClearqStatus clearq_model_new(double lambda1,
                                   double lambda2,
                                   double mu1,
                                   double mu2,
                                   double q12,
                                   double q21,
                                   double reward,
                                   double cost,
                                   struct ClearqModel **out);

/*
 # Safety
 `model` must come from `clearq_model_new` and not be freed twice.
 */
void clearq_model_free(struct ClearqModel *model);

/*
 # Safety
 All pointers must be valid.
 */
enum ClearqStatus clearq_case(const struct ClearqModel *model, enum ClearqCase *out);

/*
 Critical values `V_fu`, `V_au^min`, `V_au^max`.

 # Safety
 All pointers must be valid.
 */
enum ClearqStatus clearq_critical_values(const struct ClearqModel *model,
                                         double *v_fu,
                                         double *v_au_min,
                                         double *v_au_max);

/*
 Stationary mass `p(n, env)` under a strategy descriptor; `env` is 1 or 2.

 # Safety
 `strategy` must be a NUL-terminated string; other pointers valid.
 */
enum ClearqStatus clearq_stationary_mass(const struct ClearqModel *model,
                                         const char *strategy,
                                         uint64_t n,
                                         uint32_t env,
                                         double *out);

/*
 Net benefit of joining after seeing `n` customers, when everybody else
 follows `strategy`.

 # Safety
 `strategy` must be a NUL-terminated string; other pointers valid.
 */
enum ClearqStatus clearq_net_benefit(const struct ClearqModel *model,
                                     const char *strategy,
                                     uint64_t n,
                                     double *out);

/*
 Equilibria of the almost observable case. With `verify` non-zero each
 equilibrium is also checked against the balance-equation oracle.

 # Safety
 All pointers must be valid.
 */
enum ClearqStatus clearq_equilibria(const struct ClearqModel *model,
                                    int32_t verify,
                                    struct ClearqReport **out);

/*
 # Safety
 `report` must come from `clearq_equilibria` and not be freed twice.
 */
void clearq_report_free(struct ClearqReport *report);

/*
 # Safety
 All pointers must be valid.
 */
enum ClearqStatus clearq_report_count(const struct ClearqReport *report, size_t *out);

/*
 Strategy descriptor of equilibrium `index`. Free with
 `clearq_string_free`.

 # Safety
 All pointers must be valid.
 */
enum ClearqStatus clearq_report_descriptor(const struct ClearqReport *report,
                                           size_t index,
                                           char **out);

/*
 Whole report as JSON. Free with `clearq_string_free`.

 # Safety
 All pointers must be valid.
 */
enum ClearqStatus clearq_report_json(const struct ClearqReport *report, char **out);

/*
 # Safety
 `s` must come from this library and not be freed twice.
 */
void clearq_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLEARQ_H */
