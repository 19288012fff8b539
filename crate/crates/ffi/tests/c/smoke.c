#include <math.h>
#include <stdio.h>
#include <string.h>

#include "blindqkd.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *e = bq_last_error();                                \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, e ? e : ""); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  BqConfig cfg;
  CHECK(bq_config_default(&cfg) == BQ_STATUS_OK);
  cfg.protocol = 2;
  cfg.attack = BQ_ATTACK_IMPERSONATION;
  cfg.rounds = 2000;
  cfg.seed = 7;

  BqSimulator *sim = NULL;
  CHECK(bq_simulator_new(&cfg, &sim) == BQ_STATUS_OK);

  BqRoundRecord rec;
  CHECK(bq_simulator_run_round(sim, 3, &rec) == BQ_STATUS_OK);
  CHECK(rec.k_bob == rec.k_alice && rec.eve_guess == rec.k_alice);

  BqReport *report = NULL;
  CHECK(bq_simulator_run(sim, 2, &report) == BQ_STATUS_OK);
  double qber = -1.0, acc = -1.0;
  bool detected = true;
  CHECK(bq_report_qber(report, &qber) == BQ_STATUS_OK && qber == 0.0);
  CHECK(bq_report_eve_accuracy(report, &acc) == BQ_STATUS_OK && acc == 1.0);
  CHECK(bq_report_detected(report, &detected) == BQ_STATUS_OK && !detected);

  char *json = bq_report_to_json(report);
  CHECK(json != NULL && strstr(json, "\"qber\"") != NULL);
  bq_string_free(json);
  bq_report_free(report);
  bq_simulator_free(sim);

  cfg.protocol = 3;
  CHECK(bq_simulator_new(&cfg, &sim) == BQ_STATUS_INVALID_ARGUMENT);
  CHECK(bq_last_error() != NULL);

  CHECK(fabs(bq_born_probability(M_PI / 6.0, 0.0) - 0.75) < 1e-12);
  printf("c smoke ok\n");
  return 0;
}
