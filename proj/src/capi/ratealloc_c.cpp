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


#include "ratealloc/ratealloc.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "core/errors.hpp"
#include "core/scenario_io.hpp"

using namespace ratealloc;

struct ra_scenario {
  ScenarioFile file;
};

struct ra_result {
  ResultRow row;
  IterTrace trace;
};

struct ra_sweep {
  SweepResult result;
};

namespace {

thread_local std::string g_last_error;

ra_status fail(ra_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

// Runs `fn`, translating exceptions into status codes at the C boundary.
template <typename Fn>
ra_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const ParseError& e) {
    return fail(RA_ERR_PARSE, e.what());
  } catch (const DomainError& e) {
    return fail(RA_ERR_DOMAIN, e.what());
  } catch (const IoError& e) {
    return fail(RA_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RA_ERR_INTERNAL, e.what());
  }
}

SimConfig to_sim_config(const ra_sim_config* cfg) {
  SimConfig out;
  if (!cfg) {
    out.record_trace = false;
    return out;
  }
  out.delta = cfg->delta;
  out.max_iters = cfg->max_iters;
  switch (cfg->decay) {
    case RA_DECAY_NONE:
      out.decay = DecaySpec::none();
      break;
    case RA_DECAY_EXPONENTIAL:
      out.decay = DecaySpec::exponential(cfg->l1, cfg->l2);
      break;
    case RA_DECAY_RATIONAL:
      out.decay = DecaySpec::rational(cfg->l3);
      break;
    default:
      throw DomainError(fmt::format("unknown decay kind {}", static_cast<int>(cfg->decay)));
  }
  out.initial_bid = cfg->initial_bid;
  out.initial_previous_bid = cfg->initial_previous_bid;
  out.oscillation_window = cfg->oscillation_window;
  out.record_trace = cfg->record_trace != 0;
  return out;
}

Mode to_mode(ra_mode mode) {
  switch (mode) {
    case RA_MODE_CENTRALIZED:
      return Mode::kCentralized;
    case RA_MODE_DISTRIBUTED:
      return Mode::kDistributed;
    case RA_MODE_EURA_BASIC:
      return Mode::kEuraBasic;
  }
  throw DomainError(fmt::format("unknown mode {}", static_cast<int>(mode)));
}

ra_run_status to_run_status(const std::string& status) {
  if (status == "converged") return RA_RUN_CONVERGED;
  if (status == "oscillating") return RA_RUN_OSCILLATING;
  return RA_RUN_MAX_ITERS;
}

std::optional<double> budget_arg(double budget) {
  if (budget > 0.0) return budget;
  return std::nullopt;
}

template <typename Fn>
ra_status write_to(const char* path, Fn&& fn) {
  if (!path) return fail(RA_ERR_INVALID_ARGUMENT, "null path");
  if (std::strcmp(path, "-") == 0) {
    fn(std::cout);
    std::cout.flush();
    return RA_OK;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return fail(RA_ERR_IO, fmt::format("cannot open '{}' for writing", path));
  fn(out);
  out.flush();
  if (!out) return fail(RA_ERR_IO, fmt::format("write to '{}' failed", path));
  return RA_OK;
}

}  // namespace

extern "C" {

const char* ra_version(void) { return "1.0.0"; }

const char* ra_last_error(void) { return g_last_error.c_str(); }

const char* ra_status_string(ra_status status) {
  switch (status) {
    case RA_OK:
      return "ok";
    case RA_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case RA_ERR_PARSE:
      return "parse error";
    case RA_ERR_DOMAIN:
      return "domain error";
    case RA_ERR_IO:
      return "I/O error";
    case RA_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void ra_sim_config_init(ra_sim_config* cfg) {
  if (!cfg) return;
  const SimConfig d;
  cfg->delta = d.delta;
  cfg->max_iters = d.max_iters;
  cfg->decay = RA_DECAY_EXPONENTIAL;
  cfg->l1 = d.decay.l1;
  cfg->l2 = d.decay.l2;
  cfg->l3 = d.decay.l3;
  cfg->initial_bid = d.initial_bid;
  cfg->initial_previous_bid = d.initial_previous_bid;
  cfg->oscillation_window = d.oscillation_window;
  cfg->record_trace = 0;
}

ra_status ra_sim_config_set_decay(ra_sim_config* cfg, const char* spec) {
  if (!cfg || !spec) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  const std::string text(spec);
  auto bad = [&] { return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("bad decay '{}': expected none, exp:L1,L2 or rational:L3", text)); };
  try {
    if (text == "none") {
      cfg->decay = RA_DECAY_NONE;
      return RA_OK;
    }
    std::size_t used = 0;
    if (text.rfind("exp:", 0) == 0) {
      const auto comma = text.find(',', 4);
      if (comma == std::string::npos) return bad();
      const double l1 = std::stod(text.substr(4, comma - 4), &used);
      if (used != comma - 4) return bad();
      const std::string rest = text.substr(comma + 1);
      const double l2 = std::stod(rest, &used);
      if (used != rest.size() || !(l1 > 0.0) || !(l2 > 0.0)) return bad();
      cfg->decay = RA_DECAY_EXPONENTIAL;
      cfg->l1 = l1;
      cfg->l2 = l2;
      return RA_OK;
    }
    if (text.rfind("rational:", 0) == 0) {
      const std::string rest = text.substr(9);
      const double l3 = std::stod(rest, &used);
      if (used != rest.size() || !(l3 > 0.0)) return bad();
      cfg->decay = RA_DECAY_RATIONAL;
      cfg->l3 = l3;
      return RA_OK;
    }
  } catch (const std::exception&) {
    return bad();
  }
  return bad();
}

ra_status ra_mode_parse(const char* text, ra_mode* out) {
  if (!text || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  const auto mode = parse_mode(text);
  if (!mode) return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("unknown mode '{}'", text));
  switch (*mode) {
    case Mode::kCentralized:
      *out = RA_MODE_CENTRALIZED;
      break;
    case Mode::kDistributed:
      *out = RA_MODE_DISTRIBUTED;
      break;
    case Mode::kEuraBasic:
      *out = RA_MODE_EURA_BASIC;
      break;
  }
  return RA_OK;
}

const char* ra_mode_string(ra_mode mode) {
  try {
    return to_string(to_mode(mode));
  } catch (const std::exception&) {
    return "unknown";
  }
}

const char* ra_run_status_string(ra_run_status status) {
  switch (status) {
    case RA_RUN_CONVERGED:
      return to_string(RunStatus::kConverged);
    case RA_RUN_OSCILLATING:
      return to_string(RunStatus::kOscillating);
    case RA_RUN_MAX_ITERS:
      return to_string(RunStatus::kMaxItersExceeded);
  }
  return "unknown";
}

ra_status ra_scenario_parse(const char* text, ra_scenario** out) {
  if (!text || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ra_scenario{parse_scenario(text)};
    return RA_OK;
  });
}

ra_status ra_scenario_load(const char* path, ra_scenario** out) {
  if (!path || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new ra_scenario{load_scenario(path)};
    return RA_OK;
  });
}

void ra_scenario_free(ra_scenario* s) { delete s; }

size_t ra_scenario_ue_count(const ra_scenario* s) { return s ? s->file.ues.size() : 0; }

size_t ra_scenario_app_count(const ra_scenario* s, size_t ue) {
  if (!s || ue >= s->file.ues.size()) return 0;
  return s->file.ues[ue].apps.size();
}

int ra_scenario_budget(const ra_scenario* s, double* out) {
  if (!s || !s->file.budget) return 0;
  if (out) *out = *s->file.budget;
  return 1;
}

ra_status ra_scenario_serialize(const ra_scenario* s, char* buf, size_t cap, size_t* needed) {
  if (!s) return fail(RA_ERR_INVALID_ARGUMENT, "null scenario");
  return guarded([&] {
    const std::string text = serialize_scenario(s->file);
    if (needed) *needed = text.size() + 1;
    if (cap == 0) return RA_OK;
    if (!buf || cap < text.size() + 1) {
      return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("buffer of {} bytes too small, need {}", cap, text.size() + 1));
    }
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return RA_OK;
  });
}

ra_status ra_allocate(const ra_scenario* s, double budget, ra_mode mode, const ra_sim_config* cfg, ra_result** out) {
  if (!s || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto result = std::make_unique<ra_result>();
    const Scenario scenario = s->file.with_budget(budget_arg(budget));
    result->row = evaluate(scenario, to_mode(mode), to_sim_config(cfg), &result->trace);
    *out = result.release();
    return RA_OK;
  });
}

void ra_result_free(ra_result* r) { delete r; }

ra_run_status ra_result_status(const ra_result* r) { return r ? to_run_status(r->row.status) : RA_RUN_MAX_ITERS; }
int ra_result_iterations(const ra_result* r) { return r ? r->row.iterations : 0; }
double ra_result_budget(const ra_result* r) { return r ? r->row.budget : std::nan(""); }
double ra_result_price(const ra_result* r) { return r ? r->row.price : std::nan(""); }
int ra_result_has_rates(const ra_result* r) { return r && r->row.has_rates ? 1 : 0; }
size_t ra_result_ue_count(const ra_result* r) { return r ? r->row.app_rates.size() : 0; }

size_t ra_result_app_count(const ra_result* r, size_t ue) {
  if (!r || ue >= r->row.app_rates.size()) return 0;
  return r->row.app_rates[ue].size();
}

ra_status ra_result_rate(const ra_result* r, size_t ue, size_t app, double* out) {
  if (!r || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  if (!r->row.has_rates) return fail(RA_ERR_DOMAIN, "result has no rates (run did not converge)");
  if (ue >= r->row.app_rates.size() || app >= r->row.app_rates[ue].size()) {
    return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("no app {} on UE {}", app, ue));
  }
  *out = r->row.app_rates[ue][app];
  return RA_OK;
}

ra_status ra_result_ue_rate(const ra_result* r, size_t ue, double* out) {
  if (!r || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  if (!r->row.has_rates) return fail(RA_ERR_DOMAIN, "result has no rates (run did not converge)");
  if (ue >= r->row.ue_rates.size()) return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("no UE {}", ue));
  *out = r->row.ue_rates[ue];
  return RA_OK;
}

ra_status ra_result_ue_bid(const ra_result* r, size_t ue, double* out) {
  if (!r || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  if (ue >= r->row.ue_bids.size()) return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("no UE {}", ue));
  *out = r->row.ue_bids[ue];
  return RA_OK;
}

ra_status ra_result_kkt(const ra_result* r, double* stationarity, double* budget_residual) {
  if (!r) return fail(RA_ERR_INVALID_ARGUMENT, "null result");
  if (!r->row.has_rates) return fail(RA_ERR_DOMAIN, "result has no rates (run did not converge)");
  if (stationarity) *stationarity = r->row.kkt.stationarity_residual;
  if (budget_residual) *budget_residual = r->row.kkt.budget_residual;
  return RA_OK;
}

ra_status ra_result_write_csv(const ra_result* r, const char* path) {
  if (!r) return fail(RA_ERR_INVALID_ARGUMENT, "null result");
  return guarded([&] { return write_to(path, [&](std::ostream& os) { write_results_csv(os, {&r->row, 1}); }); });
}

ra_status ra_result_write_trace(const ra_result* r, const char* path) {
  if (!r) return fail(RA_ERR_INVALID_ARGUMENT, "null result");
  if (r->row.mode == Mode::kCentralized) return fail(RA_ERR_DOMAIN, "centralized mode has no iteration trace");
  return guarded([&] { return write_to(path, [&](std::ostream& os) { write_trace_csv(os, r->trace); }); });
}

ra_status ra_sweep_run(const ra_scenario* s, double r_min, double r_max, double r_step, ra_mode mode,
                       const ra_sim_config* cfg, ra_sweep** out) {
  if (!s || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    SweepSpec spec;
    spec.r_min = r_min;
    spec.r_max = r_max;
    spec.r_step = r_step;
    spec.mode = to_mode(mode);
    spec.sim = to_sim_config(cfg);
    *out = new ra_sweep{run_sweep(s->file, spec)};
    return RA_OK;
  });
}

void ra_sweep_free(ra_sweep* sw) { delete sw; }

size_t ra_sweep_row_count(const ra_sweep* sw) { return sw ? sw->result.rows.size() : 0; }

ra_status ra_sweep_row(const ra_sweep* sw, size_t k, double* budget, ra_run_status* status, double* price,
                       int* failed) {
  if (!sw) return fail(RA_ERR_INVALID_ARGUMENT, "null sweep");
  if (k >= sw->result.rows.size()) return fail(RA_ERR_INVALID_ARGUMENT, fmt::format("no row {}", k));
  const auto& row = sw->result.rows[k];
  if (budget) *budget = row.budget;
  if (status) *status = to_run_status(row.status);
  if (price) *price = row.price;
  if (failed) *failed = row.status == "error" ? 1 : 0;
  return RA_OK;
}

ra_status ra_sweep_write_csv(const ra_sweep* sw, const char* path) {
  if (!sw) return fail(RA_ERR_INVALID_ARGUMENT, "null sweep");
  return guarded([&] { return write_to(path, [&](std::ostream& os) { write_results_csv(os, sw->result.rows); }); });
}

ra_status ra_verify(const ra_scenario* s, double budget, const ra_sim_config* cfg, ra_verify_report* out) {
  if (!s || !out) return fail(RA_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const Scenario scenario = s->file.with_budget(budget_arg(budget));
    const SimConfig sim = to_sim_config(cfg);
    const ResultRow central = evaluate(scenario, Mode::kCentralized, sim);
    const ResultRow dist = evaluate(scenario, Mode::kDistributed, sim);

    ra_verify_report rep{};
    rep.budget = scenario.budget;
    rep.centralized_price = central.price;
    rep.centralized_stationarity = central.kkt.stationarity_residual;
    rep.centralized_budget_residual = central.kkt.budget_residual;
    rep.distributed_status = to_run_status(dist.status);
    rep.distributed_iterations = dist.iterations;
    rep.distributed_price = dist.price;
    rep.max_rate_discrepancy = std::nan("");
    rep.distributed_stationarity = std::nan("");
    rep.distributed_budget_residual = std::nan("");
    if (dist.has_rates) {
      double worst = 0.0;
      for (std::size_t i = 0; i < central.app_rates.size(); ++i) {
        for (std::size_t j = 0; j < central.app_rates[i].size(); ++j) {
          worst = std::max(worst, std::abs(central.app_rates[i][j] - dist.app_rates[i][j]));
        }
      }
      rep.max_rate_discrepancy = worst;
      rep.distributed_stationarity = dist.kkt.stationarity_residual;
      rep.distributed_budget_residual = dist.kkt.budget_residual;
    }
    *out = rep;
    return RA_OK;
  });
}

}  // extern "C"
