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


#include "core/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "core/errors.hpp"

namespace ratealloc {

double DecaySpec::step_cap(int n) const {
  if (n < 1) throw DomainError(fmt::format("decay index must be >= 1 (got {})", n));
  switch (kind) {
    case DecayKind::kNone:
      return std::numeric_limits<double>::infinity();
    case DecayKind::kExponential:
      return l1 * std::exp(-static_cast<double>(n) / l2);
    case DecayKind::kRational:
      return l3 / static_cast<double>(n);
  }
  return std::numeric_limits<double>::infinity();
}

void DecaySpec::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (kind == DecayKind::kExponential && !(positive(l1) && positive(l2))) {
    throw DomainError(fmt::format("exponential decay needs l1, l2 > 0 (got {}, {})", l1, l2));
  }
  if (kind == DecayKind::kRational && !positive(l3)) {
    throw DomainError(fmt::format("rational decay needs l3 > 0 (got {})", l3));
  }
}

void SimConfig::validate() const {
  if (!(std::isfinite(delta) && delta > 0.0)) throw DomainError(fmt::format("delta must be > 0 (got {})", delta));
  if (max_iters < 1) throw DomainError(fmt::format("max_iters must be >= 1 (got {})", max_iters));
  if (!(std::isfinite(initial_bid) && initial_bid > 0.0)) {
    throw DomainError(fmt::format("initial bid must be > 0 (got {})", initial_bid));
  }
  if (oscillation_window < 1) throw DomainError("oscillation window must be >= 1");
  decay.validate();
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kOscillating:
      return "oscillating";
    case RunStatus::kMaxItersExceeded:
      return "max-iters";
  }
  return "unknown";
}

namespace {

// UE side of the external stage: answers each price with a bid.
class UeAgent {
 public:
  UeAgent(int index, const UeSpec& spec, const DecaySpec& decay, double initial_bid)
      : index_(index), spec_(&spec), decay_(decay), last_bid_(initial_bid) {}

  BidMsg initial_bid() const { return {index_, last_bid_, 1}; }

  struct Response {
    double rate;
    double raw_bid;
    BidMsg bid;
  };

  Response on_price(const PriceMsg& msg) {
    const double rate = ue_best_response(*spec_, msg.price).total;
    const double raw = msg.price * rate;
    double sent = raw;
    const double cap = decay_.step_cap(msg.iter);
    if (std::abs(raw - last_bid_) > cap) sent = last_bid_ + std::copysign(cap, raw - last_bid_);
    last_bid_ = sent;
    return {rate, raw, {index_, sent, msg.iter + 1}};
  }

 private:
  int index_;
  const UeSpec* spec_;
  DecaySpec decay_;
  double last_bid_;
};

// eNB side: stops once no bid moved by delta, otherwise prices the round.
class EnbAgent {
 public:
  EnbAgent(std::size_t ues, double budget, double delta, double previous_bid)
      : budget_(budget), delta_(delta), previous_(ues, previous_bid) {}

  Message on_bids(std::span<const BidMsg> bids, int n) {
    bool settled = true;
    double total = 0.0;
    for (const auto& b : bids) {
      auto idx = static_cast<std::size_t>(b.ue);
      if (!(std::abs(b.bid - previous_[idx]) < delta_)) settled = false;
      previous_[idx] = b.bid;
      total += b.bid;
    }
    last_price_ = total / budget_;
    if (settled) return StopMsg{n};
    return PriceMsg{last_price_, n};
  }

  double last_price() const { return last_price_; }

 private:
  double budget_;
  double delta_;
  std::vector<double> previous_;
  double last_price_ = 0.0;
};

RunOutcome run_eura(const Scenario& s, const SimConfig& cfg, const DecaySpec& decay) {
  validate(s);
  cfg.validate();
  const std::size_t m = s.ues.size();

  std::vector<UeAgent> ues;
  ues.reserve(m);
  for (std::size_t i = 0; i < m; ++i) ues.emplace_back(static_cast<int>(i), s.ues[i], decay, cfg.initial_bid);
  EnbAgent enb(m, s.budget, cfg.delta, cfg.initial_previous_bid);

  std::vector<BidMsg> bids;
  for (const auto& ue : ues) bids.push_back(ue.initial_bid());

  RunOutcome out;
  out.trace.budget = s.budget;
  auto bid_values = [&bids] {
    std::vector<double> v;
    v.reserve(bids.size());
    for (const auto& b : bids) v.push_back(b.bid);
    return v;
  };

  for (int n = 1; n <= cfg.max_iters; ++n) {
    const Message reply = enb.on_bids(bids, n);
    if (std::holds_alternative<StopMsg>(reply)) {
      const double p = enb.last_price();
      out.status = RunStatus::kConverged;
      out.iterations = n;
      out.price = p;
      std::vector<double> rates;
      for (const auto& b : bids) rates.push_back(b.bid / p);
      out.ue_rates = std::move(rates);
      out.trace.final_bids = bid_values();
      out.trace.final_price = p;
      return out;
    }

    const auto& price = std::get<PriceMsg>(reply);
    out.trace.prices.push_back(price.price);
    IterRecord rec;
    if (cfg.record_trace) {
      rec.n = n;
      rec.price = price.price;
      rec.bids = bid_values();
      rec.step_cap = decay.step_cap(n);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const auto resp = ues[i].on_price(price);
      bids[i] = resp.bid;
      if (cfg.record_trace) {
        rec.rates.push_back(resp.rate);
        rec.raw_bids.push_back(resp.raw_bid);
        rec.sent_bids.push_back(resp.bid.bid);
      }
    }
    if (cfg.record_trace) out.trace.rounds.push_back(std::move(rec));
  }

  out.iterations = cfg.max_iters;
  out.price = out.trace.prices.back();
  out.trace.final_bids = bid_values();
  out.trace.final_price = out.price;
  out.status = RunStatus::kMaxItersExceeded;
  if (out.trace.prices.size() >= 2 * static_cast<std::size_t>(cfg.oscillation_window) &&
      detect_oscillation(out.trace.prices, cfg.oscillation_window, cfg.delta).oscillating) {
    out.status = RunStatus::kOscillating;
  }
  return out;
}

DistributedResult two_stage(const Scenario& s, RunOutcome eura) {
  DistributedResult out;
  if (eura.status == RunStatus::kConverged) {
    out.allocation = iura_stage(s, *eura.ue_rates, eura.price, &out.internal_prices);
  }
  out.eura = std::move(eura);
  return out;
}

}  // namespace

RunOutcome run_eura_basic(const Scenario& s, const SimConfig& cfg) { return run_eura(s, cfg, DecaySpec::none()); }

RunOutcome run_eura_robust(const Scenario& s, const SimConfig& cfg) {
  if (cfg.decay.kind == DecayKind::kNone) throw DomainError("robust run needs a decay function");
  return run_eura(s, cfg, cfg.decay);
}

Allocation iura_stage(const Scenario& s, std::span<const double> ue_rates, double eura_price,
                      std::vector<double>* internal_prices) {
  if (ue_rates.size() != s.ues.size()) throw DomainError("UE rate vector does not match scenario");
  Allocation a;
  a.shadow_price = eura_price;
  if (internal_prices) internal_prices->clear();
  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    IuraResult r = iura_allocate(s.ues[i], ue_rates[i]);
    double total = 0.0;
    for (double x : r.split) total += x;
    a.ue_totals.push_back(total);
    a.rates.push_back(std::move(r.split));
    if (internal_prices) internal_prices->push_back(r.price);
  }
  return a;
}

DistributedResult run_distributed(const Scenario& s, const SimConfig& cfg) {
  return two_stage(s, run_eura_robust(s, cfg));
}

DistributedResult run_distributed_basic(const Scenario& s, const SimConfig& cfg) {
  return two_stage(s, run_eura_basic(s, cfg));
}

CentralizedProtocolResult run_centralized_protocol(const Scenario& s) {
  validate(s);
  CentralizedProtocolResult out;
  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    out.log.emplace_back(ParamsUploadMsg{static_cast<int>(i), s.ues[i].apps, s.ues[i].beta});
  }

  // The eNB rebuilds the scenario from what it received.
  Scenario received;
  received.budget = s.budget;
  for (const auto& msg : out.log) {
    const auto& up = std::get<ParamsUploadMsg>(msg);
    received.ues.push_back({up.apps, up.beta});
  }
  out.allocation = centralized_allocate(received).allocation;

  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    out.log.emplace_back(RateGrantMsg{static_cast<int>(i), out.allocation.rates[i]});
  }
  return out;
}

OscillationReport detect_oscillation(std::span<const double> prices, int window, double delta) {
  if (window < 1) throw DomainError("oscillation window must be >= 1");
  const auto span_len = 2 * static_cast<std::size_t>(window);
  if (prices.size() < span_len) {
    throw DomainError(fmt::format("trace has {} prices, oscillation check needs {}", prices.size(), span_len));
  }
  const auto tail = prices.last(span_len);
  OscillationReport report;
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  report.amplitude = *hi - *lo;

  double previous_step = 0.0;
  for (std::size_t k = 1; k < tail.size(); ++k) {
    const double step = tail[k] - tail[k - 1];
    if (step == 0.0) continue;
    if (previous_step != 0.0 && (step > 0.0) != (previous_step > 0.0)) ++report.sign_changes;
    previous_step = step;
  }
  report.oscillating = report.amplitude > 10.0 * delta && report.sign_changes >= window / 2;
  return report;
}

OscillationReport detect_oscillation(const IterTrace& trace, int window, double delta) {
  return detect_oscillation(trace.prices, window, delta);
}

double steady_state_price_bound(const Scenario& s) {
  const SigmoidalUtility* widest = nullptr;
  for (const auto& ue : s.ues) {
    for (const auto& app : ue.apps) {
      const auto* sig = app.utility.as_sigmoidal();
      if (sig && (!widest || sig->b() > widest->b())) widest = sig;
    }
  }
  if (!widest) throw DomainError("scenario has no sigmoidal application");
  const double d = widest->d();
  return widest->a() * d / (1.0 - d) + widest->a() / 2.0;
}

}  // namespace ratealloc
