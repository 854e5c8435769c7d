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

#include <span>
#include <vector>

#include "core/utility.hpp"

namespace ratealloc {

/// One application on a UE: its utility and usage fraction alpha in (0, 1].
struct AppSpec {
  Utility utility;
  double alpha = 1.0;

  friend bool operator==(const AppSpec&, const AppSpec&) = default;
};

/// A UE: its applications (alphas summing to 1) and subscription weight beta.
struct UeSpec {
  std::vector<AppSpec> apps;
  double beta = 1.0;

  friend bool operator==(const UeSpec&, const UeSpec&) = default;
};

/// The cell: UEs sharing an eNB rate budget.
struct Scenario {
  std::vector<UeSpec> ues;
  double budget = 0.0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Tolerance on sum_j alpha_ij = 1.
inline constexpr double kAlphaSumTolerance = 1e-6;

// Throws DomainError naming the offending UE/app.
void validate(const UeSpec& ue);
void validate(const Scenario& s);

std::size_t app_count(const Scenario& s);

/// Per-application rates with the multiplier that produced them. Which price
/// `shadow_price` holds depends on the solver: the total price for the
/// centralized problem, the eNB price for the external stage.
struct Allocation {
  std::vector<std::vector<double>> rates;  // [ue][app]
  std::vector<double> ue_totals;
  double shadow_price = 0.0;
};

struct KktReport {
  double stationarity_residual = 0.0;  // max_ij |beta_i alpha_ij S_ij(r_ij) - p| / p
  double budget_residual = 0.0;        // |sum r_ij - R| / R
  bool budget_binding = false;         // p > 0 and the budget is met
};

// Budget residual below which the constraint counts as active.
inline constexpr double kBindingTolerance = 1e-6;

// Demand of one application at price p: S^{-1}(p / (beta * alpha)).
double app_demand(const AppSpec& app, double beta, double price);

struct UeResponse {
  double total = 0.0;
  std::vector<double> split;
};

// Rate maximizing beta * log V(r) - p r, where V is evaluated at its best
// internal split. Every app satisfies beta * alpha_j * S_j(r_j) = p.
UeResponse ue_best_response(const UeSpec& ue, double price);

struct CentralizedResult {
  Allocation allocation;
  KktReport kkt;
  int iterations = 0;  // bracket expansions plus bisection steps
};

// Maximizes sum_i beta_i sum_j alpha_ij log U_ij(r_ij) subject to
// sum r_ij = R. Throws InternalError when no price bracket can be found.
CentralizedResult centralized_allocate(const Scenario& s);

struct IuraResult {
  std::vector<double> split;
  double price = 0.0;  // internal price p_I
};

// Splits a granted UE rate across the UE's apps so alpha_j S_j(r_j) = p_I for
// every j. Throws DomainError when r_opt < N * kRateFloor.
IuraResult iura_allocate(const UeSpec& ue, double r_opt);

// sum_j alpha_j S_j(r_j) at the internally optimal split of r_i, which equals
// N_i * p_I.
double aggregated_slope(const UeSpec& ue, double r_i);

// sum_i beta_i sum_j alpha_ij log U_ij(r_ij).
double objective(const Scenario& s, const std::vector<std::vector<double>>& rates);

// Grid search over every allocation on a `grid_step` lattice that spends the
// whole budget. Test oracle only: refuses more than 4 apps, R / grid_step
// above 2000, or an enumeration larger than kOracleMaxPoints.
struct OracleResult {
  std::vector<std::vector<double>> rates;
  double objective = 0.0;
};
inline constexpr double kOracleMaxPoints = 5e7;
OracleResult brute_force_oracle(const Scenario& s, double grid_step);

// Checks an allocation against the first-order conditions at its own shadow
// price. Throws DomainError on shape mismatch.
KktReport verify_kkt(const Scenario& s, const Allocation& a);

}  // namespace ratealloc
