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


// ratealloc command line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ratealloc/ratealloc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

struct ScenarioHandle {
  ra_scenario* ptr = nullptr;
  ~ScenarioHandle() { ra_scenario_free(ptr); }
};

struct ResultHandle {
  ra_result* ptr = nullptr;
  ~ResultHandle() { ra_result_free(ptr); }
};

struct SweepHandle {
  ra_sweep* ptr = nullptr;
  ~SweepHandle() { ra_sweep_free(ptr); }
};

// Bad input (flags, missing or malformed files) maps to the usage exit code.
int report(ra_status st) {
  std::fprintf(stderr, "ratealloc: %s: %s\n", ra_status_string(st), ra_last_error());
  switch (st) {
    case RA_ERR_INVALID_ARGUMENT:
    case RA_ERR_PARSE:
    case RA_ERR_IO:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

struct SimFlags {
  double delta = 0.0;
  int max_iters = 0;
  std::string decay;
  std::string mode = "centralized";
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--delta", f.delta, "bid-difference stopping threshold (default 1e-4)");
  cmd->add_option("--decay", f.decay, "bid step cap: exp:L1,L2 | rational:L3 | none (default exp:10,100)");
  cmd->add_option("--max-iters", f.max_iters, "iteration limit for the distributed modes (default 5000)");
}

int build_config(const SimFlags& f, ra_sim_config& cfg) {
  ra_sim_config_init(&cfg);
  if (f.delta != 0.0) cfg.delta = f.delta;
  if (f.max_iters != 0) cfg.max_iters = f.max_iters;
  if (!f.decay.empty()) {
    if (ra_status st = ra_sim_config_set_decay(&cfg, f.decay.c_str()); st != RA_OK) return report(st);
  }
  return kExitOk;
}

int load(const std::string& path, ScenarioHandle& s) {
  if (ra_status st = ra_scenario_load(path.c_str(), &s.ptr); st != RA_OK) return report(st);
  return kExitOk;
}

int cmd_allocate(const std::string& scenario, double budget, const SimFlags& flags, const std::string& out,
                 const std::string& trace) {
  ra_mode mode;
  if (ra_status st = ra_mode_parse(flags.mode.c_str(), &mode); st != RA_OK) return report(st);
  ra_sim_config cfg;
  if (int rc = build_config(flags, cfg); rc != kExitOk) return rc;
  cfg.record_trace = trace.empty() ? 0 : 1;

  ScenarioHandle s;
  if (int rc = load(scenario, s); rc != kExitOk) return rc;
  ResultHandle r;
  if (ra_status st = ra_allocate(s.ptr, budget, mode, &cfg, &r.ptr); st != RA_OK) return report(st);

  if (ra_status st = ra_result_write_csv(r.ptr, out.c_str()); st != RA_OK) return report(st);
  if (!trace.empty()) {
    if (ra_status st = ra_result_write_trace(r.ptr, trace.c_str()); st != RA_OK) return report(st);
  }

  const ra_run_status status = ra_result_status(r.ptr);
  if (status != RA_RUN_CONVERGED) {
    std::fprintf(stderr, "ratealloc: %s run did not converge: %s after %d iterations (p=%.12g)\n",
                 ra_mode_string(mode), ra_run_status_string(status), ra_result_iterations(r.ptr),
                 ra_result_price(r.ptr));
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& scenario, double r_min, double r_max, double r_step, const SimFlags& flags,
              const std::string& out) {
  ra_mode mode;
  if (ra_status st = ra_mode_parse(flags.mode.c_str(), &mode); st != RA_OK) return report(st);
  ra_sim_config cfg;
  if (int rc = build_config(flags, cfg); rc != kExitOk) return rc;

  ScenarioHandle s;
  if (int rc = load(scenario, s); rc != kExitOk) return rc;
  SweepHandle sw;
  if (ra_status st = ra_sweep_run(s.ptr, r_min, r_max, r_step, mode, &cfg, &sw.ptr); st != RA_OK) return report(st);
  if (ra_status st = ra_sweep_write_csv(sw.ptr, out.c_str()); st != RA_OK) return report(st);

  const size_t rows = ra_sweep_row_count(sw.ptr);
  size_t unconverged = 0;
  for (size_t k = 0; k < rows; ++k) {
    ra_run_status status;
    ra_sweep_row(sw.ptr, k, nullptr, &status, nullptr, nullptr);
    if (status != RA_RUN_CONVERGED) ++unconverged;
  }
  std::fprintf(stderr, "ratealloc: %zu rows, %zu not converged\n", rows, unconverged);
  return kExitOk;
}

int cmd_verify(const std::string& scenario, double budget, const SimFlags& flags, double tol) {
  ra_sim_config cfg;
  if (int rc = build_config(flags, cfg); rc != kExitOk) return rc;
  ScenarioHandle s;
  if (int rc = load(scenario, s); rc != kExitOk) return rc;
  ra_verify_report rep;
  if (ra_status st = ra_verify(s.ptr, budget, &cfg, &rep); st != RA_OK) return report(st);

  std::printf("budget                        %.12g\n", rep.budget);
  std::printf("centralized price             %.12g\n", rep.centralized_price);
  std::printf("centralized stationarity      %.3e\n", rep.centralized_stationarity);
  std::printf("centralized budget residual   %.3e\n", rep.centralized_budget_residual);
  std::printf("distributed status            %s (%d iterations)\n", ra_run_status_string(rep.distributed_status),
              rep.distributed_iterations);
  std::printf("distributed price             %.12g\n", rep.distributed_price);
  if (rep.distributed_status != RA_RUN_CONVERGED) {
    std::fprintf(stderr, "ratealloc: distributed run did not converge: %s\n",
                 ra_run_status_string(rep.distributed_status));
    return kExitNotConverged;
  }
  std::printf("distributed stationarity      %.3e\n", rep.distributed_stationarity);
  std::printf("distributed budget residual   %.3e\n", rep.distributed_budget_residual);
  std::printf("max rate discrepancy          %.6e (%.3e x R)\n", rep.max_rate_discrepancy,
              rep.max_rate_discrepancy / rep.budget);
  if (rep.max_rate_discrepancy > tol * rep.budget) {
    std::fprintf(stderr, "ratealloc: discrepancy exceeds %.3g x R\n", tol);
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Utility proportional fair rate allocation for mixed-traffic cells"};
  app.set_version_flag("--version", std::string(ra_version()));
  app.require_subcommand(1);

  std::string scenario, out = "-", trace;
  double budget = 0.0, r_min = 0.0, r_max = 0.0, r_step = 0.0, tol = 1e-2;
  SimFlags flags;

  auto* allocate = app.add_subcommand("allocate", "allocate one budget");
  allocate->add_option("--scenario", scenario, "scenario file")->required();
  allocate->add_option("--budget", budget, "eNB rate budget R")->required()->check(CLI::PositiveNumber);
  allocate->add_option("--mode", flags.mode, "centralized | distributed | eura-basic")
      ->check(CLI::IsMember({"centralized", "distributed", "eura-basic"}));
  allocate->add_option("--out", out, "result CSV path, - for stdout");
  allocate->add_option("--trace", trace, "iteration trace CSV path (iterative modes)");
  add_sim_flags(allocate, flags);

  auto* sweep = app.add_subcommand("sweep", "allocate over a budget grid");
  sweep->add_option("--scenario", scenario, "scenario file")->required();
  sweep->add_option("--r-min", r_min, "first budget")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--r-max", r_max, "last budget")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--r-step", r_step, "budget step")->required()->check(CLI::PositiveNumber);
  sweep->add_option("--mode", flags.mode, "centralized | distributed | eura-basic")
      ->check(CLI::IsMember({"centralized", "distributed", "eura-basic"}));
  sweep->add_option("--out", out, "result CSV path, - for stdout");
  add_sim_flags(sweep, flags);

  auto* verify = app.add_subcommand("verify", "compare distributed and centralized allocations");
  verify->add_option("--scenario", scenario, "scenario file")->required();
  verify->add_option("--budget", budget, "eNB rate budget R")->required()->check(CLI::PositiveNumber);
  verify->add_option("--tol", tol, "allowed max rate discrepancy as a fraction of R (default 1e-2)")
      ->check(CLI::PositiveNumber);
  add_sim_flags(verify, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (allocate->parsed()) return cmd_allocate(scenario, budget, flags, out, trace);
  if (sweep->parsed()) return cmd_sweep(scenario, r_min, r_max, r_step, flags, out);
  return cmd_verify(scenario, budget, flags, tol);
}
