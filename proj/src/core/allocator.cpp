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


#include "core/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "core/errors.hpp"

namespace ratealloc {
namespace {

// One demand curve r(p) = S^{-1}(p / weight).
struct WeightedUtility {
  const Utility* utility;
  double weight;
};

struct BudgetSolution {
  double price = 0.0;
  std::vector<double> rates;
  int iterations = 0;
};

std::vector<double> demands(std::span<const WeightedUtility> items, double price) {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(slope_inverse(*item.utility, price / item.weight));
  return out;
}

double sum(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total;
}

// Finds the price at which total demand equals `budget`. Demand is strictly
// decreasing in price, so a bracket always exists while the budget lies in
// (N * kRateFloor, N * kRateCap).
//
// Around a sigmoid's plateau the demand curve is nearly vertical: adjacent
// doubles in price can straddle a jump of several rate units. Bisection therefore
// runs until the bracket is two adjacent doubles, and the rates are the convex
// combination of the two bracket demands that spends the budget exactly. Each
// app's slope then lies between the two bracket prices, so stationarity holds to
// one ulp of price.
BudgetSolution solve_budget(std::span<const WeightedUtility> items, double budget) {
  BudgetSolution sol;
  double lo = 1e-12;
  double hi = 1.0;

  std::vector<double> d_hi = demands(items, hi);
  for (int n = 0; sum(d_hi) > budget; ++n) {
    if (n == 200) {
      throw InternalError(fmt::format("no price found with total demand below budget {}", budget));
    }
    hi *= 2.0;
    d_hi = demands(items, hi);
    ++sol.iterations;
  }
  std::vector<double> d_lo = demands(items, lo);
  for (int n = 0; sum(d_lo) < budget; ++n) {
    if (n == 200) {
      throw InternalError(fmt::format("no price found with total demand above budget {}", budget));
    }
    lo *= 0.5;
    d_lo = demands(items, lo);
    ++sol.iterations;
  }

  for (int n = 0; n < 400; ++n) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    std::vector<double> d_mid = demands(items, mid);
    ++sol.iterations;
    const double total = sum(d_mid);
    if (total == budget) {
      sol.price = mid;
      sol.rates = std::move(d_mid);
      return sol;
    }
    if (total > budget) {
      lo = mid;
      d_lo = std::move(d_mid);
    } else {
      hi = mid;
      d_hi = std::move(d_mid);
    }
  }

  const double total_lo = sum(d_lo);
  const double total_hi = sum(d_hi);
  const double theta = total_lo > total_hi ? std::clamp((budget - total_hi) / (total_lo - total_hi), 0.0, 1.0) : 1.0;
  sol.price = theta * lo + (1.0 - theta) * hi;
  sol.rates.resize(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    sol.rates[j] = theta * d_lo[j] + (1.0 - theta) * d_hi[j];
  }
  return sol;
}

}  // namespace

void validate(const UeSpec& ue) {
  if (ue.apps.empty()) throw DomainError("UE has no applications");
  if (!(std::isfinite(ue.beta) && ue.beta > 0.0)) {
    throw DomainError(fmt::format("beta must be > 0 (got {})", ue.beta));
  }
  double alpha_sum = 0.0;
  for (const auto& app : ue.apps) {
    if (!(std::isfinite(app.alpha) && app.alpha > 0.0 && app.alpha <= 1.0)) {
      throw DomainError(fmt::format("alpha must lie in (0, 1] (got {})", app.alpha));
    }
    alpha_sum += app.alpha;
  }
  if (std::abs(alpha_sum - 1.0) > kAlphaSumTolerance) {
    throw DomainError(fmt::format("alpha sum {} != 1", alpha_sum));
  }
}

void validate(const Scenario& s) {
  if (s.ues.empty()) throw DomainError("scenario has no UEs");
  if (!(std::isfinite(s.budget) && s.budget > 0.0)) {
    throw DomainError(fmt::format("budget must be > 0 (got {})", s.budget));
  }
  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    try {
      validate(s.ues[i]);
    } catch (const DomainError& e) {
      throw DomainError(fmt::format("UE {}: {}", i + 1, e.what()));
    }
  }
}

std::size_t app_count(const Scenario& s) {
  std::size_t n = 0;
  for (const auto& ue : s.ues) n += ue.apps.size();
  return n;
}

double app_demand(const AppSpec& app, double beta, double price) {
  if (!(beta > 0.0)) throw DomainError(fmt::format("beta must be > 0 (got {})", beta));
  if (!(price > 0.0)) throw DomainError(fmt::format("price must be > 0 (got {})", price));
  return slope_inverse(app.utility, price / (beta * app.alpha));
}

UeResponse ue_best_response(const UeSpec& ue, double price) {
  UeResponse out;
  out.split.reserve(ue.apps.size());
  for (const auto& app : ue.apps) {
    out.split.push_back(app_demand(app, ue.beta, price));
    out.total += out.split.back();
  }
  return out;
}

CentralizedResult centralized_allocate(const Scenario& s) {
  validate(s);
  std::vector<WeightedUtility> items;
  items.reserve(app_count(s));
  for (const auto& ue : s.ues) {
    for (const auto& app : ue.apps) items.push_back({&app.utility, ue.beta * app.alpha});
  }
  BudgetSolution sol = solve_budget(items, s.budget);

  CentralizedResult out;
  out.iterations = sol.iterations;
  Allocation& a = out.allocation;
  a.shadow_price = sol.price;
  std::size_t k = 0;
  for (const auto& ue : s.ues) {
    std::vector<double> row(sol.rates.begin() + static_cast<std::ptrdiff_t>(k),
                            sol.rates.begin() + static_cast<std::ptrdiff_t>(k + ue.apps.size()));
    k += ue.apps.size();
    a.ue_totals.push_back(sum(row));
    a.rates.push_back(std::move(row));
  }
  out.kkt = verify_kkt(s, a);
  return out;
}

IuraResult iura_allocate(const UeSpec& ue, double r_opt) {
  validate(ue);
  const double n = static_cast<double>(ue.apps.size());
  if (!(std::isfinite(r_opt) && r_opt >= n * kRateFloor)) {
    throw DomainError(fmt::format("UE rate {} is below the floor for {} apps", r_opt, ue.apps.size()));
  }
  if (ue.apps.size() == 1) {
    return {{r_opt}, ue.apps[0].alpha * slope(ue.apps[0].utility, r_opt)};
  }
  std::vector<WeightedUtility> items;
  for (const auto& app : ue.apps) items.push_back({&app.utility, app.alpha});
  BudgetSolution sol = solve_budget(items, r_opt);
  return {std::move(sol.rates), sol.price};
}

double aggregated_slope(const UeSpec& ue, double r_i) {
  return static_cast<double>(ue.apps.size()) * iura_allocate(ue, r_i).price;
}

double objective(const Scenario& s, const std::vector<std::vector<double>>& rates) {
  if (rates.size() != s.ues.size()) throw DomainError("rate matrix does not match scenario");
  double total = 0.0;
  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    const auto& ue = s.ues[i];
    if (rates[i].size() != ue.apps.size()) throw DomainError("rate matrix does not match scenario");
    double inner = 0.0;
    for (std::size_t j = 0; j < ue.apps.size(); ++j) inner += ue.apps[j].alpha * log_eval(ue.apps[j].utility, rates[i][j]);
    total += ue.beta * inner;
  }
  return total;
}

OracleResult brute_force_oracle(const Scenario& s, double grid_step) {
  validate(s);
  const std::size_t n = app_count(s);
  if (!(grid_step > 0.0)) throw DomainError("grid step must be > 0");
  if (n > 4) throw DomainError(fmt::format("oracle refuses {} apps (limit 4)", n));
  const double units = s.budget / grid_step;
  if (units > 2000.0) throw DomainError(fmt::format("oracle refuses R / grid_step = {} (limit 2000)", units));
  // Compositions of ~units into n positive parts: C(units - 1, n - 1).
  double points = 1.0;
  for (std::size_t k = 1; k < n; ++k) points *= (units - static_cast<double>(k)) / static_cast<double>(k);
  if (points > kOracleMaxPoints) throw DomainError(fmt::format("oracle enumeration of {} points refused", points));

  struct Flat {
    const Utility* u;
    double weight;
  };
  std::vector<Flat> flat;
  for (const auto& ue : s.ues) {
    for (const auto& app : ue.apps) flat.push_back({&app.utility, ue.beta * app.alpha});
  }

  std::vector<double> current(n, 0.0);
  std::vector<double> best_rates;
  double best = -std::numeric_limits<double>::infinity();
  const double eps = 1e-9 * grid_step;

  // Every app but the last walks the lattice; the last takes the remainder.
  std::function<void(std::size_t, double, double)> walk = [&](std::size_t idx, double remaining, double partial) {
    if (idx + 1 == n) {
      if (remaining <= eps) return;
      current[idx] = remaining;
      const double value = partial + flat[idx].weight * log_eval(*flat[idx].u, remaining);
      if (value > best) {
        best = value;
        best_rates = current;
      }
      return;
    }
    for (int k = 1;; ++k) {
      const double r = k * grid_step;
      if (remaining - r <= eps) break;
      current[idx] = r;
      walk(idx + 1, remaining - r, partial + flat[idx].weight * log_eval(*flat[idx].u, r));
    }
  };
  walk(0, s.budget, 0.0);
  if (best_rates.empty()) throw DomainError("grid step too coarse for this budget");

  OracleResult out;
  out.objective = best;
  std::size_t k = 0;
  for (const auto& ue : s.ues) {
    out.rates.emplace_back(best_rates.begin() + static_cast<std::ptrdiff_t>(k),
                           best_rates.begin() + static_cast<std::ptrdiff_t>(k + ue.apps.size()));
    k += ue.apps.size();
  }
  return out;
}

KktReport verify_kkt(const Scenario& s, const Allocation& a) {
  if (a.rates.size() != s.ues.size()) {
    throw DomainError(fmt::format("allocation has {} UEs, scenario has {}", a.rates.size(), s.ues.size()));
  }
  if (!(a.shadow_price > 0.0)) throw DomainError("allocation has no positive shadow price");
  KktReport report;
  double total = 0.0;
  for (std::size_t i = 0; i < s.ues.size(); ++i) {
    const auto& ue = s.ues[i];
    if (a.rates[i].size() != ue.apps.size()) {
      throw DomainError(fmt::format("UE {}: allocation has {} apps, scenario has {}", i + 1, a.rates[i].size(),
                                    ue.apps.size()));
    }
    for (std::size_t j = 0; j < ue.apps.size(); ++j) {
      const double r = a.rates[i][j];
      total += r;
      const double marginal = ue.beta * ue.apps[j].alpha * slope(ue.apps[j].utility, r);
      report.stationarity_residual =
          std::max(report.stationarity_residual, std::abs(marginal - a.shadow_price) / a.shadow_price);
    }
  }
  report.budget_residual = std::abs(total - s.budget) / s.budget;
  report.budget_binding = report.budget_residual <= kBindingTolerance;
  return report;
}

}  // namespace ratealloc
