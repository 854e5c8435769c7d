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

// Independent reference computations for the test suites. Nothing here calls
// into the solver code except to build Scenario values.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "core/allocator.hpp"

namespace oracle {

// Six UEs, each with one sigmoid and one log app, beta = 1.
inline ratealloc::Scenario six_ue(double budget) {
  using ratealloc::Utility;
  const double a[] = {5, 4, 3, 2, 1, 0.5};
  const double b[] = {5, 10, 15, 20, 25, 30};
  const double k[] = {15, 12, 9, 6, 3, 1};
  const double alpha_sig[] = {0.1, 0.5, 0.9, 0.1, 0.5, 0.9};
  const double alpha_log[] = {0.9, 0.5, 0.1, 0.9, 0.5, 0.1};
  ratealloc::Scenario s;
  s.budget = budget;
  for (int i = 0; i < 6; ++i) {
    ratealloc::UeSpec ue;
    ue.apps.push_back({Utility::sigmoidal(a[i], b[i]), alpha_sig[i]});
    ue.apps.push_back({Utility::logarithmic(k[i], 100.0), alpha_log[i]});
    s.ues.push_back(ue);
  }
  return s;
}

inline double six_ue_inflection_sum() { return 5 + 10 + 15 + 20 + 25 + 30; }

// Direct substitution into the sigmoid and log definitions, in long double.
inline long double sigmoid_direct(long double a, long double b, long double r) {
  const long double c = 1 + std::exp(-a * b);
  const long double d = 1 / (1 + std::exp(a * b));
  return c * (1 / (1 + std::exp(-a * (r - b))) - d);
}

inline long double log_direct(long double k, long double rmax, long double r) {
  return std::log(1 + k * r) / std::log(1 + k * rmax);
}

inline double utility_direct(const ratealloc::Utility& u, double r) {
  if (const auto* sig = u.as_sigmoidal()) return static_cast<double>(sigmoid_direct(sig->a(), sig->b(), r));
  const auto* lg = u.as_logarithmic();
  return static_cast<double>(log_direct(lg->k(), lg->r_max(), r));
}

// Symbolic derivative of log U for the log utility.
inline double log_slope_closed(double k, double r) { return k / ((1 + k * r) * std::log1p(k * r)); }

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

// Maximizer of a unimodal function on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters && hi - lo > 1e-13 * (1 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return (lo + hi) / 2;
}

// Best value of sum_j alpha_j log U_j(r_j) over two-app splits of `total`,
// found by a dense scan refined with golden section.
inline double two_app_inner_value(const ratealloc::UeSpec& ue, double total, double* best_first = nullptr) {
  auto f = [&](double x) {
    return ue.apps[0].alpha * std::log(utility_direct(ue.apps[0].utility, x)) +
           ue.apps[1].alpha * std::log(utility_direct(ue.apps[1].utility, total - x));
  };
  const int n = 4000;
  double best = -INFINITY, arg = total / 2;
  for (int i = 1; i < n; ++i) {
    const double x = total * i / n;
    const double v = f(x);
    if (v > best) {
      best = v;
      arg = x;
    }
  }
  const double step = total / n;
  arg = golden_max(f, std::max(arg - step, 1e-12), std::min(arg + step, total - 1e-12));
  if (best_first) *best_first = arg;
  return f(arg);
}

struct RandomShape {
  int max_ues = 4;
  int max_apps = 3;
  int max_total_apps = 1000;
};

// Random scenario with sigmoid a in [0.5, 5], b in [1, 30], log k in [1, 15],
// r_max = 100, normalized alphas and beta in [0.5, 2]. Budget left at 0.
// At least one app is logarithmic: an all-sigmoid cell has no representable
// price once the budget passes roughly b + 166/a per app.
inline ratealloc::Scenario random_scenario(std::mt19937_64& rng, const RandomShape& shape) {
  using ratealloc::Utility;
  std::uniform_real_distribution<double> ua(0.5, 5.0), ub(1.0, 30.0), uk(1.0, 15.0), ubeta(0.5, 2.0),
      ualpha(0.1, 1.0), coin(0.0, 1.0);
  ratealloc::Scenario s;
  int total = 0;
  const int m = std::uniform_int_distribution<int>(1, shape.max_ues)(rng);
  for (int i = 0; i < m; ++i) {
    const int room = shape.max_total_apps - total - (m - i - 1);
    const int n = std::min(std::uniform_int_distribution<int>(1, shape.max_apps)(rng), std::max(room, 1));
    total += n;
    ratealloc::UeSpec ue;
    ue.beta = ubeta(rng);
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& x : w) sum += x = ualpha(rng);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double alpha = j + 1 < n ? w[j] / sum : 1.0 - acc;
      acc += alpha;
      if (coin(rng) < 0.5) {
        ue.apps.push_back({Utility::sigmoidal(ua(rng), ub(rng)), alpha});
      } else {
        ue.apps.push_back({Utility::logarithmic(uk(rng), 100.0), alpha});
      }
    }
    s.ues.push_back(ue);
  }
  bool has_log = false;
  for (const auto& ue : s.ues)
    for (const auto& app : ue.apps) has_log = has_log || !app.utility.is_sigmoidal();
  if (!has_log) {
    auto& ue = s.ues[std::uniform_int_distribution<std::size_t>(0, s.ues.size() - 1)(rng)];
    ue.apps.back().utility = Utility::logarithmic(uk(rng), 100.0);
  }
  return s;
}

inline double sigmoid_inflection_sum(const ratealloc::Scenario& s) {
  double sum = 0.0;
  for (const auto& ue : s.ues)
    for (const auto& app : ue.apps)
      if (const auto* sig = app.utility.as_sigmoidal()) sum += sig->b();
  return sum;
}

}  // namespace oracle
