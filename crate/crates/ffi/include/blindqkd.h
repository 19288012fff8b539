#ifndef BLINDQKD_H
#define BLINDQKD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  BQ_ATTACK_NONE = 0,
  BQ_ATTACK_PASSIVE = 1,
  BQ_ATTACK_IMPERSONATION = 2,
  BQ_ATTACK_INTERCEPT_RESEND = 3,
} BqAttack;

typedef enum {
  BQ_STATUS_OK = 0,
  BQ_STATUS_NULL_POINTER = 1,
  BQ_STATUS_INVALID_ARGUMENT = 2,
  BQ_STATUS_SIMULATION_ERROR = 3,
  /**
   * The requested statistic is undefined for this run (e.g. no guesses).
   */
  BQ_STATUS_UNDEFINED = 4,
  BQ_STATUS_IO_ERROR = 5,
  BQ_STATUS_PANIC = 6,
} BqStatus;

typedef struct BqReport BqReport;

typedef struct BqSimulator BqSimulator;

typedef struct {
  /**
   * 1 or 2.
   */
  uint8_t protocol;
  BqAttack attack;
  uint64_t rounds;
  uint64_t seed;
  /**
   * 0 for continuous angles, otherwise K for the grid `jπ/K`.
   */
  uint32_t grid;
  double threshold;
} BqConfig;

/**
 * One round. Bits are 0/1, or -1 when absent.
 */
typedef struct {
  uint64_t round;
  uint8_t protocol;
  int8_t k_alice;
  int8_t k_bob;
  int8_t s;
  int8_t b;
  int8_t l;
  int8_t eve_guess;
  bool eve_active;
  bool aborted;
  bool bob_measurement_random;
  double phi;
  double theta1;
  /**
   * NaN for protocol 1.
   */
  double theta2;
} BqRoundRecord;

typedef struct {
  uint64_t total_cases;
  uint64_t failed_cases;
} BqVerdictSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *bq_last_error(void);

const char *bq_version(void);

/**
 * Protocol 1, no attack, 10000 rounds, seed 0, continuous angles, threshold 0.05.
 */
BqStatus bq_config_default(BqConfig *out);

BqStatus bq_simulator_new(const BqConfig *config, BqSimulator **out);

void bq_simulator_free(BqSimulator *sim);

BqStatus bq_simulator_run_round(const BqSimulator *sim, uint64_t round, BqRoundRecord *out);

/**
 * Run every configured round. `threads == 0` uses the default pool.
 */
BqStatus bq_simulator_run(const BqSimulator *sim, uint32_t threads, BqReport **out);

void bq_report_free(BqReport *report);

BqStatus bq_report_counts(const BqReport *report, uint64_t *rounds, uint64_t *aborted);

BqStatus bq_report_qber(const BqReport *report, double *out);

/**
 * `BQ_STATUS_UNDEFINED` when the strategy made no guesses.
 */
BqStatus bq_report_eve_accuracy(const BqReport *report, double *out);

BqStatus bq_report_mi_ab(const BqReport *report, double *out);

BqStatus bq_report_mi_ae(const BqReport *report, double *out);

BqStatus bq_report_detected(const BqReport *report, bool *out);

/**
 * The JSON report as a new string; release it with [`bq_string_free`]. NULL on failure.
 */
char *bq_report_to_json(const BqReport *report);

BqStatus bq_report_write_json(const BqReport *report, const char *path);

void bq_string_free(char *s);

/**
 * Exhaustive oracle over every binary parameter and every grid angle `jπ/grid`.
 */
BqStatus bq_enumerate(uint8_t protocol, BqAttack attack, uint32_t grid, BqVerdictSummary *out);

/**
 * Born probability of outcome 0 for a state at `state_angle` measured in the
 * basis whose outcome-0 vector is at `basis_angle`. NaN for non-finite input.
 */
double bq_born_probability(double state_angle, double basis_angle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLINDQKD_H */
