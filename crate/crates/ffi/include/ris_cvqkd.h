#ifndef RIS_CVQKD_H
#define RIS_CVQKD_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RcqStatus {
  RCQ_STATUS_OK = 0,
  RCQ_STATUS_NULL_POINTER = 1,
  RCQ_STATUS_INVALID_ARGUMENT = 2,
  RCQ_STATUS_CONFIG = 3,
  RCQ_STATUS_GEOMETRY = 4,
  RCQ_STATUS_PASSIVITY = 5,
  RCQ_STATUS_UNPHYSICAL = 6,
  RCQ_STATUS_CONTRACT = 7,
  RCQ_STATUS_NON_BRACKETING = 8,
  RCQ_STATUS_OPTIMIZER = 9,
  RCQ_STATUS_IO = 10,
  RCQ_STATUS_PANIC = 99,
} RcqStatus;

typedef enum RcqScenario {
  RCQ_SCENARIO_DIRECT = 0,
  RCQ_SCENARIO_TX_RIS = 1,
  RCQ_SCENARIO_RIS_RX = 2,
  RCQ_SCENARIO_GLOBAL = 3,
} RcqScenario;

/**
 * Synthesized link at a fixed distance together with its noise budget.
 */
typedef struct RcqLink RcqLink;

/**
 * Rates in bits per channel use. `skr` is the raw rate and may be negative.
 */
typedef struct RcqRate {
  double mutual_information;
  double holevo;
  double skr;
} RcqRate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a link from a JSON configuration (NUL-terminated UTF-8) at
 * `distance_m` metres. The sweep section of the configuration is ignored.
 *
 * # Safety
 * `json` must be a valid C string and `out` a writable pointer.
 */
enum RcqStatus rcq_link_from_config_json(const char *json, double distance_m, struct RcqLink **out);

/**
 * Builds a link from the default configuration at `distance_m` metres.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum RcqStatus rcq_link_default(double distance_m, struct RcqLink **out);

/**
 * Releases a link. Null is accepted.
 *
 * # Safety
 * `link` must come from this library and not be used afterwards.
 */
void rcq_link_free(struct RcqLink *link);

/**
 * Number of RIS elements, i.e. the phase count the link expects.
 *
 * # Safety
 * `link` must be a live handle and `out` writable.
 */
enum RcqStatus rcq_link_ris_elements(const struct RcqLink *link, size_t *out);

/**
 * Rates of `scenario` at the given RIS phases (radians, `phase_count` of
 * them) and splitter transmissivities.
 *
 * # Safety
 * `link` must be a live handle, `phases` must point to `phase_count`
 * doubles and `out` must be writable.
 */
enum RcqStatus rcq_link_evaluate(const struct RcqLink *link,
                                 enum RcqScenario scenario,
                                 const double *phases,
                                 size_t phase_count,
                                 double eta_a,
                                 double eta_b,
                                 struct RcqRate *out);

/**
 * Runs the swarm over phases and splitters for `scenario`. Zero `particles`
 * or `iterations` keep the configured values. The best phases are written to
 * `phases_out`, whose length must equal the RIS element count.
 *
 * # Safety
 * `link` must be a live handle, `phases_out` must hold `phase_count`
 * doubles and the remaining out pointers must be writable.
 */
enum RcqStatus rcq_link_optimize(const struct RcqLink *link,
                                 enum RcqScenario scenario,
                                 size_t particles,
                                 size_t iterations,
                                 uint64_t seed,
                                 double *phases_out,
                                 size_t phase_count,
                                 double *eta_a_out,
                                 double *eta_b_out,
                                 struct RcqRate *out);

/**
 * Entropy in bits of a thermal mode with symplectic eigenvalue `nu` ≥ 1.
 *
 * # Safety
 * `out` must be writable.
 */
enum RcqStatus rcq_ho_entropy(double nu, double *out);

/**
 * Rates of one parallel subchannel with transmissivity `beta` under the
 * global attack, thermal vacuum at the default carrier and temperature.
 *
 * # Safety
 * `out` must be writable.
 */
enum RcqStatus rcq_global_subchannel_skr(double beta,
                                         double signal_variance,
                                         double eve_variance,
                                         double detector_noise,
                                         struct RcqRate *out);

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *rcq_last_error(void);

/**
 * Library version as a static C string.
 */
const char *rcq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIS_CVQKD_H */
