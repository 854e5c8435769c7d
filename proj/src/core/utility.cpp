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


#include "core/utility.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "core/errors.hpp"

namespace ratealloc {
namespace {

void require_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0.0)) {
    throw DomainError(fmt::format("{} must be finite and > 0 (got {})", what, v));
  }
}

void require_rate(double r, bool allow_zero) {
  if (!std::isfinite(r) || r < 0.0 || (!allow_zero && r == 0.0)) {
    throw DomainError(fmt::format("rate must be finite and {} 0 (got {})", allow_zero ? ">=" : ">", r));
  }
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// log(1 - e^{-x}) for x > 0.
double log1mexp(double x) { return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x)); }

}  // namespace

SigmoidalUtility::SigmoidalUtility(double a, double b) : a_(a), b_(b) {
  require_positive(a, "sigmoid steepness a");
  require_positive(b, "sigmoid inflection b");
  const double ab = a * b;
  if (ab > kOverflowExponent) {
    d_ = std::exp(-ab);
    c_ = 1.0 + std::exp(-ab);
  } else {
    const double e = std::exp(ab);
    c_ = (1.0 + e) / e;
    d_ = 1.0 / (1.0 + e);
  }
}

// Substituting c and d into the defining expression collapses it to
// (1 - e^{-ar}) / (1 + e^{-a(r-b)}), which has no cancellation near r = 0 and no
// overflow for large a*b.
double SigmoidalUtility::eval(double r) const {
  if (r == 0.0) return 0.0;
  return -std::expm1(-a_ * r) / (1.0 + std::exp(-a_ * (r - b_)));
}

double SigmoidalUtility::log_eval(double r) const { return log1mexp(a_ * r) - softplus(a_ * (b_ - r)); }

// a / (e^{ar} - 1) + a / (1 + e^{a(r-b)}): the two terms are the derivatives of
// the two logs above.
double SigmoidalUtility::slope(double r) const {
  const double near_origin = a_ / std::expm1(a_ * r);
  const double z = a_ * (r - b_);
  const double logistic = z > 0.0 ? a_ * std::exp(-z) / (1.0 + std::exp(-z)) : a_ / (1.0 + std::exp(z));
  return near_origin + logistic;
}

LogarithmicUtility::LogarithmicUtility(double k, double r_max) : k_(k), r_max_(r_max) {
  require_positive(k, "logarithmic sensitivity k");
  require_positive(r_max, "logarithmic r_max");
  log_norm_ = std::log1p(k * r_max);
}

double LogarithmicUtility::eval(double r) const { return std::log1p(k_ * r) / log_norm_; }

double LogarithmicUtility::log_eval(double r) const { return std::log(std::log1p(k_ * r)) - std::log(log_norm_); }

double LogarithmicUtility::slope(double r) const {
  const double kr = k_ * r;
  return k_ / ((1.0 + kr) * std::log1p(kr));
}

double eval(const Utility& u, double r) {
  require_rate(r, /*allow_zero=*/true);
  return std::visit([r](const auto& v) { return v.eval(r); }, u.variant());
}

double log_eval(const Utility& u, double r) {
  require_rate(r, /*allow_zero=*/false);
  return std::visit([r](const auto& v) { return v.log_eval(r); }, u.variant());
}

double slope(const Utility& u, double r) {
  require_rate(r, /*allow_zero=*/false);
  return std::visit([r](const auto& v) { return v.slope(r); }, u.variant());
}

double slope_inverse(const Utility& u, double p) {
  require_positive(p, "price");
  auto s = [&u](double r) { return std::visit([r](const auto& v) { return v.slope(r); }, u.variant()); };
  if (s(kRateFloor) <= p) return kRateFloor;
  if (s(kRateCap) >= p) return kRateCap;

  // Geometric bisection: the bracket spans 18 decades, so halving in log space
  // reaches adjacent doubles in about 60 steps.
  double lo = kRateFloor;
  double hi = kRateCap;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (s(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(s(lo) - p) <= std::abs(s(hi) - p) ? lo : hi;
}

double inflection(const Utility& u) {
  if (const auto* sig = u.as_sigmoidal()) return sig->b();
  return 0.0;
}

}  // namespace ratealloc
