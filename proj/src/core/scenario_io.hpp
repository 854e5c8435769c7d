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


#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/allocator.hpp"
#include "core/protocol.hpp"

namespace ratealloc {

// ---------------------------------------------------------------------------
// Scenario text format
//
//   # comment
//   budget = 105          (optional; may be supplied at run time instead)
//   [ue]
//   beta = 1              (optional, default 1)
//   app = sigmoid a=5 b=5 alpha=0.1
//   app = log k=15 r_max=100 alpha=0.9
//
// One [ue] section per UE, one `app` line per application, in order.

/// A parsed scenario document. The budget is optional because sweeps and the
/// CLI supply it separately.
struct ScenarioFile {
  std::vector<UeSpec> ues;
  std::optional<double> budget;

  // Scenario using `budget_override` if given, else the declared budget.
  // Throws DomainError when neither is available.
  Scenario with_budget(std::optional<double> budget_override = std::nullopt) const;
};

// Throws ParseError carrying the 1-based line of the first problem.
ScenarioFile parse_scenario(std::string_view text);

// Reads and parses a file; I/O failures throw IoError naming the path.
ScenarioFile load_scenario(const std::filesystem::path& path);

// Shortest round-trip number formatting, so parse(serialize(s)) == s exactly.
std::string serialize_scenario(const ScenarioFile& s);
std::string serialize_scenario(const Scenario& s);

// ---------------------------------------------------------------------------
// Experiments

enum class Mode { kCentralized, kDistributed, kEuraBasic };

const char* to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view text);

/// Result of one allocation at one budget, in the shape the CSV writer needs.
struct ResultRow {
  double budget = 0.0;
  Mode mode = Mode::kCentralized;
  std::string status;  // converged | oscillating | max-iters | error
  int iterations = 0;
  double price = 0.0;
  bool has_rates = false;
  std::vector<std::vector<double>> app_rates;  // [ue][app]; rate bids are price * rate
  std::vector<double> ue_rates;
  std::vector<double> ue_bids;
  KktReport kkt;
  std::string error;
};

// Runs one mode at the scenario's budget. Non-convergence is reported in the
// row status; solver errors propagate as exceptions. `trace_out`, when non-null,
// receives the external-stage trace for the iterative modes.
ResultRow evaluate(const Scenario& s, Mode mode, const SimConfig& cfg, IterTrace* trace_out = nullptr);

struct SweepSpec {
  double r_min = 10.0;
  double r_max = 200.0;
  double r_step = 5.0;
  Mode mode = Mode::kCentralized;
  SimConfig sim;
  unsigned jobs = 0;  // 0: hardware concurrency

  void validate() const;
  // floor((r_max - r_min) / r_step) + 1
  std::size_t row_count() const;
  double budget_at(std::size_t k) const;
};

struct SweepResult {
  std::vector<ResultRow> rows;  // ascending budget
};

SweepResult run_sweep(const ScenarioFile& s, const SweepSpec& spec);

// CSV with header `R,mode,status,iters,p,ue,app,rate,bid`, one line per
// (budget, ue, app). UE and app indices are 1-based.
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
// CSV with header `n,p,ue,w,r`, one line per (round, ue).
void write_trace_csv(std::ostream& out, const IterTrace& trace);

// File variants; failures throw IoError naming the path.
void emit_results(const SweepResult& res, const std::filesystem::path& path);
void emit_results(const IterTrace& trace, const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace ratealloc
