// Copyright 2026 The ratealloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/*
 * ratealloc C API.
 *
 * Rate allocation for a cell whose UEs run mixed delay-tolerant (logarithmic
 * utility) and real-time (sigmoidal utility) applications. Every object is an
 * opaque handle created by a ra_*_parse/load/run/allocate call and released
 * with the matching ra_*_free. Functions returning ra_status leave a
 * thread-local message readable through ra_last_error() on failure.
 *
 * Handles are immutable once created and may be shared between threads for
 * read-only calls.
 */
#ifndef RATEALLOC_RATEALLOC_H_
#define RATEALLOC_RATEALLOC_H_

#include <stddef.h>

#if defined(RATEALLOC_BUILDING_LIBRARY)
#define RA_API __attribute__((visibility("default")))
#else
#define RA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ra_status {
  RA_OK = 0,
  RA_ERR_INVALID_ARGUMENT = 1, /* null handle, bad index, unknown enum value */
  RA_ERR_PARSE = 2,            /* scenario text rejected */
  RA_ERR_DOMAIN = 3,           /* value outside a function's domain */
  RA_ERR_IO = 4,               /* file could not be read or written */
  RA_ERR_INTERNAL = 5          /* solver failure on validated input */
} ra_status;

typedef enum ra_mode {
  RA_MODE_CENTRALIZED = 0, /* one-stage solve at the eNB */
  RA_MODE_DISTRIBUTED = 1, /* damped bid/price stage, then per-UE split */
  RA_MODE_EURA_BASIC = 2   /* undamped bid/price stage, then per-UE split */
} ra_mode;

typedef enum ra_decay_kind {
  RA_DECAY_NONE = 0,
  RA_DECAY_EXPONENTIAL = 1, /* cap l1 * exp(-n / l2) */
  RA_DECAY_RATIONAL = 2     /* cap l3 / n */
} ra_decay_kind;

typedef enum ra_run_status {
  RA_RUN_CONVERGED = 0,
  RA_RUN_OSCILLATING = 1,
  RA_RUN_MAX_ITERS = 2
} ra_run_status;

typedef struct ra_sim_config {
  double delta;       /* bid-difference stopping threshold */
  int max_iters;
  ra_decay_kind decay;
  double l1, l2, l3;  /* decay constants */
  double initial_bid; /* w_i(1) */
  double initial_previous_bid; /* w_i(0) */
  int oscillation_window;
  int record_trace;   /* nonzero: keep per-round bids/rates for ra_result_write_trace */
} ra_sim_config;

typedef struct ra_scenario ra_scenario;
typedef struct ra_result ra_result;
typedef struct ra_sweep ra_sweep;

RA_API const char* ra_version(void);
RA_API const char* ra_last_error(void);
RA_API const char* ra_status_string(ra_status status);

/* Defaults: delta 1e-4, 5000 iterations, exponential decay l1=10 l2=100,
 * l3=10, w(1)=1, w(0)=0, window 50, no trace. */
RA_API void ra_sim_config_init(ra_sim_config* cfg);

/* Accepts "none", "exp:L1,L2" or "rational:L3". */
RA_API ra_status ra_sim_config_set_decay(ra_sim_config* cfg, const char* spec);

/* Accepts "centralized", "distributed" or "eura-basic". */
RA_API ra_status ra_mode_parse(const char* text, ra_mode* out);
RA_API const char* ra_mode_string(ra_mode mode);
RA_API const char* ra_run_status_string(ra_run_status status);

/* ---- scenarios -------------------------------------------------------- */

RA_API ra_status ra_scenario_parse(const char* text, ra_scenario** out);
RA_API ra_status ra_scenario_load(const char* path, ra_scenario** out);
RA_API void ra_scenario_free(ra_scenario* s);

RA_API size_t ra_scenario_ue_count(const ra_scenario* s);
RA_API size_t ra_scenario_app_count(const ra_scenario* s, size_t ue);
/* Returns 1 and writes the budget when the document declares one, else 0. */
RA_API int ra_scenario_budget(const ra_scenario* s, double* out);

/* Writes the scenario text (NUL-terminated) into buf. *needed receives the
 * required size including the terminator; pass cap 0 to query it. */
RA_API ra_status ra_scenario_serialize(const ra_scenario* s, char* buf, size_t cap, size_t* needed);

/* ---- single allocation ------------------------------------------------ */

/* budget <= 0 uses the budget declared in the scenario. cfg may be NULL for
 * defaults. A run that does not converge still returns RA_OK; inspect
 * ra_result_status. */
RA_API ra_status ra_allocate(const ra_scenario* s, double budget, ra_mode mode, const ra_sim_config* cfg,
                             ra_result** out);
RA_API void ra_result_free(ra_result* r);

RA_API ra_run_status ra_result_status(const ra_result* r);
RA_API int ra_result_iterations(const ra_result* r);
RA_API double ra_result_budget(const ra_result* r);
RA_API double ra_result_price(const ra_result* r);
RA_API int ra_result_has_rates(const ra_result* r);
RA_API size_t ra_result_ue_count(const ra_result* r);
RA_API size_t ra_result_app_count(const ra_result* r, size_t ue);
RA_API ra_status ra_result_rate(const ra_result* r, size_t ue, size_t app, double* out);
RA_API ra_status ra_result_ue_rate(const ra_result* r, size_t ue, double* out);
RA_API ra_status ra_result_ue_bid(const ra_result* r, size_t ue, double* out);
RA_API ra_status ra_result_kkt(const ra_result* r, double* stationarity, double* budget_residual);

/* CSV writers; path "-" writes to stdout. */
RA_API ra_status ra_result_write_csv(const ra_result* r, const char* path);
RA_API ra_status ra_result_write_trace(const ra_result* r, const char* path);

/* ---- sweeps ----------------------------------------------------------- */

RA_API ra_status ra_sweep_run(const ra_scenario* s, double r_min, double r_max, double r_step, ra_mode mode,
                              const ra_sim_config* cfg, ra_sweep** out);
RA_API void ra_sweep_free(ra_sweep* sw);
RA_API size_t ra_sweep_row_count(const ra_sweep* sw);
/* Any output pointer may be NULL. Failed rows report RA_RUN_MAX_ITERS and
 * *failed = 1. */
RA_API ra_status ra_sweep_row(const ra_sweep* sw, size_t k, double* budget, ra_run_status* status, double* price,
                              int* failed);
RA_API ra_status ra_sweep_write_csv(const ra_sweep* sw, const char* path);

/* ---- cross-check ------------------------------------------------------ */

typedef struct ra_verify_report {
  double budget;
  double max_rate_discrepancy; /* max |r_ij(distributed) - r_ij(centralized)|, NaN if not converged */
  double centralized_price;
  double centralized_stationarity;
  double centralized_budget_residual;
  ra_run_status distributed_status;
  int distributed_iterations;
  double distributed_price;
  double distributed_stationarity;
  double distributed_budget_residual;
} ra_verify_report;

/* Runs the centralized and distributed modes at one budget and compares. */
RA_API ra_status ra_verify(const ra_scenario* s, double budget, const ra_sim_config* cfg, ra_verify_report* out);

#ifdef __cplusplus
}
#endif

#endif /* RATEALLOC_RATEALLOC_H_ */
