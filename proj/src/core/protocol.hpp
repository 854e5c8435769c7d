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

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "core/allocator.hpp"

namespace ratealloc {

// ---------------------------------------------------------------------------
// Messages exchanged between UEs and the eNB.

struct BidMsg {
  int ue = 0;
  double bid = 0.0;
  int iter = 0;
};
struct PriceMsg {
  double price = 0.0;
  int iter = 0;
};
struct StopMsg {
  int iter = 0;
};
struct ParamsUploadMsg {
  int ue = 0;
  std::vector<AppSpec> apps;
  double beta = 1.0;
};
struct RateGrantMsg {
  int ue = 0;
  std::vector<double> rates;
};

using Message = std::variant<BidMsg, PriceMsg, StopMsg, ParamsUploadMsg, RateGrantMsg>;

// ---------------------------------------------------------------------------
// Bid-step damping.

enum class DecayKind { kNone, kExponential, kRational };

/// Cap on |w_i(n) - w_i(n-1)|: l1 e^{-n/l2} (exponential) or l3 / n
/// (rational). Both are positive and nonincreasing in n.
struct DecaySpec {
  DecayKind kind = DecayKind::kNone;
  double l1 = 10.0;
  double l2 = 100.0;
  double l3 = 10.0;

  static DecaySpec none() { return {}; }
  static DecaySpec exponential(double l1, double l2) { return {DecayKind::kExponential, l1, l2, 10.0}; }
  static DecaySpec rational(double l3) { return {DecayKind::kRational, 10.0, 100.0, l3}; }

  // +infinity for kNone. Throws DomainError for n < 1.
  double step_cap(int n) const;
  void validate() const;
};

struct SimConfig {
  double delta = 1e-4;  // stop once every |w_i(n) - w_i(n-1)| < delta
  int max_iters = 5000;
  DecaySpec decay = DecaySpec::exponential(10.0, 100.0);
  double initial_bid = 1.0;           // w_i(1), sent by every UE
  double initial_previous_bid = 0.0;  // w_i(0), used only by the first difference check
  bool record_trace = true;
  int oscillation_window = 50;

  void validate() const;
};

enum class RunStatus { kConverged, kOscillating, kMaxItersExceeded };

const char* to_string(RunStatus s);

/// One synchronous round n: bids w(n) received, price p(n) = sum w(n) / R
/// broadcast, each UE's best-response rate r(n) and raw bid p(n) r(n), the
/// step cap in force, and the bids w(n+1) actually sent after clamping.
struct IterRecord {
  int n = 0;
  double price = 0.0;
  std::vector<double> bids;
  std::vector<double> rates;
  std::vector<double> raw_bids;
  std::vector<double> sent_bids;
  double step_cap = 0.0;
};

/// The observable history of an external-stage run. `prices` is always
/// kept so oscillation can be classified; per-UE vectors in `rounds` only when
/// SimConfig::record_trace is set.
struct IterTrace {
  double budget = 0.0;
  std::vector<double> prices;
  std::vector<IterRecord> rounds;
  std::vector<double> final_bids;
  double final_price = 0.0;
};

struct RunOutcome {
  RunStatus status = RunStatus::kMaxItersExceeded;
  int iterations = 0;
  // Present when converged: r_i = w_i / p at the final eNB price.
  std::optional<std::vector<double>> ue_rates;
  double price = 0.0;
  IterTrace trace;
};

// Kelly-style bid/price iteration without damping (decay in cfg is ignored).
RunOutcome run_eura_basic(const Scenario& s, const SimConfig& cfg);

// Same iteration with each UE clamping its bid step to the decay cap. Throws
// DomainError when cfg.decay is kNone.
RunOutcome run_eura_robust(const Scenario& s, const SimConfig& cfg);

// Second stage: splits each UE's granted rate across its apps. The returned
// allocation carries `eura_price` as its shadow price; `internal_prices`
// receives each UE's p_I when non-null.
Allocation iura_stage(const Scenario& s, std::span<const double> ue_rates, double eura_price,
                      std::vector<double>* internal_prices = nullptr);

struct DistributedResult {
  RunOutcome eura;
  std::optional<Allocation> allocation;  // absent when stage 1 did not converge
  std::vector<double> internal_prices;
};

// Robust external stage followed by the internal split.
DistributedResult run_distributed(const Scenario& s, const SimConfig& cfg);

// Basic external stage followed by the internal split.
DistributedResult run_distributed_basic(const Scenario& s, const SimConfig& cfg);

struct CentralizedProtocolResult {
  Allocation allocation;
  std::vector<Message> log;
};

// Every UE uploads its parameters, the eNB solves the whole problem and grants
// per-app rates.
CentralizedProtocolResult run_centralized_protocol(const Scenario& s);

struct OscillationReport {
  bool oscillating = false;
  double amplitude = 0.0;
  int sign_changes = 0;
};

// Looks at the last 2 * window prices: amplitude is max - min, and the tail
// counts as oscillating when amplitude > 10 * delta with at least window / 2
// sign alternations of successive differences. Throws DomainError when fewer
// than 2 * window prices exist.
OscillationReport detect_oscillation(std::span<const double> prices, int window, double delta);
OscillationReport detect_oscillation(const IterTrace& trace, int window, double delta);

// a d / (1 - d) + a / 2 for the sigmoid with the largest inflection rate
// (first one on ties). Throws DomainError when the scenario has no sigmoid.
double steady_state_price_bound(const Scenario& s);

}  // namespace ratealloc
