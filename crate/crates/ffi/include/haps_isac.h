#ifndef HAPS_ISAC_H
#define HAPS_ISAC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HapsIsacStatus {
  HAPS_ISAC_STATUS_OK = 0,
  HAPS_ISAC_STATUS_NULL_POINTER = 1,
  HAPS_ISAC_STATUS_INVALID_ARGUMENT = 2,
  HAPS_ISAC_STATUS_CONFIG = 3,
  HAPS_ISAC_STATUS_DOMAIN = 4,
  HAPS_ISAC_STATUS_INFEASIBLE = 5,
  HAPS_ISAC_STATUS_TOO_LARGE = 6,
  HAPS_ISAC_STATUS_BUFFER_TOO_SMALL = 7,
  HAPS_ISAC_STATUS_IO = 8,
  HAPS_ISAC_STATUS_PANIC = 9,
} HapsIsacStatus;

typedef enum HapsIsacMode {
  HAPS_ISAC_MODE_SENSING = 0,
  HAPS_ISAC_MODE_COMM = 1,
  HAPS_ISAC_MODE_MULTI = 2,
  HAPS_ISAC_MODE_BASELINE_UAV_ONLY = 3,
} HapsIsacMode;

/**
 * Output of one experiment run.
 */
typedef struct HapsIsacResult HapsIsacResult;

/**
 * Resolved scenario with all placements explicit.
 */
typedef struct HapsIsacScenario HapsIsacScenario;

/**
 * Objective values of a solved design.
 */
typedef struct HapsIsacObjective {
  /**
   * Minimum CU SINR, linear.
   */
  double eta;
  /**
   * Echo power at the HAPS, W.
   */
  double omega;
  /**
   * Minimum rate, bits/s/Hz.
   */
  double min_rate;
  double fitness;
  double max_violation;
  bool feasible;
} HapsIsacObjective;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next library call on this thread.
 */
const char *haps_isac_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *haps_isac_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer obtained from this library that has not
 * been freed yet.
 */
void haps_isac_string_free(char *s);

/**
 * Shannon rate `log2(1 + sinr)`.
 */
double haps_isac_rate(double sinr);

/**
 * Build a scenario with default parameters.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum HapsIsacStatus haps_isac_scenario_default(struct HapsIsacScenario **out);

/**
 * Build a scenario from a JSON scenario config. Missing placements are
 * drawn from the config's placement seed.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HapsIsacStatus haps_isac_scenario_from_json(const char *json, struct HapsIsacScenario **out);

/**
 * # Safety
 * `sc` must be NULL or a handle from this library not freed yet.
 */
void haps_isac_scenario_free(struct HapsIsacScenario *sc);

/**
 * Number of UAVs, CUs per UAV and targets per UAV. Any output pointer may
 * be NULL.
 *
 * # Safety
 * `sc` must be a live handle; non-NULL outputs must be writable.
 */
enum HapsIsacStatus haps_isac_scenario_counts(const struct HapsIsacScenario *sc,
                                              size_t *uavs,
                                              size_t *cus,
                                              size_t *targets);

/**
 * Resolved scenario config as JSON. Free with [`haps_isac_string_free`].
 *
 * # Safety
 * `sc` must be a live handle; `out` must be writable.
 */
enum HapsIsacStatus haps_isac_scenario_to_json(const struct HapsIsacScenario *sc, char **out);

/**
 * Solve one instance with the desk GA preset and the given seed. The
 * weighted objectives are scaled by the equal-split reference design.
 *
 * # Safety
 * `sc` must be a live handle; `out` must be writable.
 */
enum HapsIsacStatus haps_isac_solve(const struct HapsIsacScenario *sc,
                                    enum HapsIsacMode mode,
                                    double mu,
                                    uint64_t seed,
                                    struct HapsIsacObjective *out);

/**
 * Write the steering vector of a `rows x cols` array toward `(theta, phi)`
 * into `re` and `im`, each of length `len >= rows * cols`.
 *
 * # Safety
 * `re` and `im` must point to at least `len` writable doubles.
 */
enum HapsIsacStatus haps_isac_steering_vector(size_t rows,
                                              size_t cols,
                                              double spacing_over_lambda,
                                              double theta,
                                              double phi,
                                              double *re,
                                              double *im,
                                              size_t len);

/**
 * Run an experiment by kind name (`pareto`, `pmax-sweep`, `gamma-sweep`,
 * `k-sweep`, `single`, `trajectory`, `validate`). `config_json` is a run
 * config or a previous result envelope; NULL means defaults.
 *
 * # Safety
 * String arguments must be NULL-terminated (or NULL where allowed);
 * `out` must be writable.
 */
enum HapsIsacStatus haps_isac_run(const char *kind,
                                  const char *config_json,
                                  struct HapsIsacResult **out);

/**
 * # Safety
 * `res` must be NULL or a handle from this library not freed yet.
 */
void haps_isac_result_free(struct HapsIsacResult *res);

/**
 * Number of data rows (0 for a NULL handle).
 *
 * # Safety
 * `res` must be NULL or a live handle.
 */
size_t haps_isac_result_rows(const struct HapsIsacResult *res);

/**
 * Result table as CSV. Free with [`haps_isac_string_free`].
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
enum HapsIsacStatus haps_isac_result_csv(const struct HapsIsacResult *res, char **out);

/**
 * Full result envelope as JSON. Free with [`haps_isac_string_free`].
 *
 * # Safety
 * `res` must be a live handle; `out` must be writable.
 */
enum HapsIsacStatus haps_isac_result_json(const struct HapsIsacResult *res, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAPS_ISAC_H */
