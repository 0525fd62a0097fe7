#ifndef MFNIPR_H
#define MFNIPR_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MfnMode {
  MFN_MODE_PARTIAL_INFO = 0,
  MFN_MODE_BASELINE = 1,
  MFN_MODE_ENUMERATE = 2,
} MfnMode;

typedef enum MfnSolveStatus {
  MFN_SOLVE_STATUS_OPTIMAL = 0,
  MFN_SOLVE_STATUS_TIME_LIMIT = 1,
  MFN_SOLVE_STATUS_ITERATION_LIMIT = 2,
} MfnSolveStatus;

typedef enum MfnStatus {
  MFN_STATUS_OK = 0,
  MFN_STATUS_NULL_POINTER = 1,
  MFN_STATUS_INVALID_ARGUMENT = 2,
  MFN_STATUS_VALIDATION = 3,
  MFN_STATUS_PARSE = 4,
  MFN_STATUS_IO = 5,
  MFN_STATUS_RESOURCE = 6,
  MFN_STATUS_NUMERICAL = 7,
  MFN_STATUS_INFEASIBLE = 8,
  MFN_STATUS_INTERNAL = 9,
  MFN_STATUS_PANIC = 10,
} MfnStatus;

typedef enum MfnVariant {
  MFN_VARIANT_BASE = 0,
  MFN_VARIANT_RECRUITMENT = 1,
  MFN_VARIANT_ORGANIZATIONAL = 2,
} MfnVariant;

/**
 * A validated instance.
 */
typedef struct MfnInstance MfnInstance;

/**
 * The outcome of [`mfn_solve`].
 */
typedef struct MfnSolveResult MfnSolveResult;

typedef struct MfnSolveOptions {
  enum MfnMode mode;
  double budget;
  double epsilon;
  /**
   * Seconds; zero or negative means no limit.
   */
  double time_limit;
  bool leadership;
} MfnSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *mfn_last_error(void);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `instance` a writable pointer.
 */
enum MfnStatus mfn_instance_from_json(const char *json, struct MfnInstance **instance);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `instance` a writable pointer.
 */
enum MfnStatus mfn_instance_from_file(const char *path, struct MfnInstance **instance);

/**
 * Seeded instance with the default generator settings.
 *
 * # Safety
 * `instance` must be a writable pointer.
 */
enum MfnStatus mfn_instance_generate(uint64_t seed,
                                     size_t users,
                                     enum MfnVariant variant,
                                     struct MfnInstance **instance);

/**
 * # Safety
 * `instance` must be null or a handle not yet freed.
 */
void mfn_instance_free(struct MfnInstance *instance);

/**
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t mfn_instance_num_nodes(const struct MfnInstance *instance);

/**
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t mfn_instance_num_restructurable(const struct MfnInstance *instance);

/**
 * Maximum flow with no interdiction and no restructuring.
 *
 * # Safety
 * `instance` must be a live handle and `value` a writable pointer.
 */
enum MfnStatus mfn_instance_base_flow(const struct MfnInstance *instance, double *value);

/**
 * Serializes the instance; release the string with [`mfn_string_free`].
 *
 * # Safety
 * `instance` must be a live handle and `json` a writable pointer.
 */
enum MfnStatus mfn_instance_to_json(const struct MfnInstance *instance, char **json);

struct MfnSolveOptions mfn_solve_options_default(void);

/**
 * # Safety
 * `instance` and `options` must be live, `result` a writable pointer.
 */
enum MfnStatus mfn_solve(const struct MfnInstance *instance,
                         const struct MfnSolveOptions *options,
                         struct MfnSolveResult **result);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void mfn_result_free(struct MfnSolveResult *result);

/**
 * NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double mfn_result_lower(const struct MfnSolveResult *result);

/**
 * NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double mfn_result_upper(const struct MfnSolveResult *result);

/**
 * # Safety
 * `result` must be a live handle and `status` a writable pointer.
 */
enum MfnStatus mfn_result_status(const struct MfnSolveResult *result, enum MfnSolveStatus *status);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t mfn_result_iterations(const struct MfnSolveResult *result);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
size_t mfn_result_plans_visited(const struct MfnSolveResult *result);

/**
 * Copies up to `capacity` interdicted node ids into `nodes` and returns how
 * many there are in total. `nodes` may be null when `capacity` is 0.
 *
 * # Safety
 * `result` must be null or a live handle; `nodes` must have room for
 * `capacity` entries.
 */
size_t mfn_result_interdicted(const struct MfnSolveResult *result, size_t *nodes, size_t capacity);

/**
 * The result in the command-line `--out` layout; release the string with
 * [`mfn_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `json` a writable pointer.
 */
enum MfnStatus mfn_result_to_json(const struct MfnSolveResult *result, char **json);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void mfn_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFNIPR_H */
