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

#include <variant>

namespace ratealloc {

// All rate root finding is confined to [kRateFloor, kRateCap]. Slopes diverge
// as r -> 0 and vanish as r -> infinity, so this bracket keeps every inverse
// representable.
inline constexpr double kRateFloor = 1e-9;
inline constexpr double kRateCap = 1e9;

// Above this value of a*b the normalization constants switch to their
// asymptotic forms instead of evaluating e^{ab}.
inline constexpr double kOverflowExponent = 700.0;

/// Normalized sigmoid U(r) = c * (1 / (1 + e^{-a(r-b)}) - d) with U(0) = 0 and
/// U(inf) = 1. Models real-time traffic; `b` is the inflection rate.
class SigmoidalUtility {
 public:
  SigmoidalUtility(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }

  double eval(double r) const;
  double log_eval(double r) const;
  double slope(double r) const;

  friend bool operator==(const SigmoidalUtility&, const SigmoidalUtility&) = default;

 private:
  double a_;
  double b_;
  double c_;
  double d_;
};

/// Normalized logarithm U(r) = log(1 + k r) / log(1 + k r_max). Models
/// delay-tolerant traffic; U(r_max) = 1.
class LogarithmicUtility {
 public:
  LogarithmicUtility(double k, double r_max);

  double k() const { return k_; }
  double r_max() const { return r_max_; }

  // Values above r_max exceed 1; clamping is left to the caller.
  double eval(double r) const;
  double log_eval(double r) const;
  double slope(double r) const;

  friend bool operator==(const LogarithmicUtility&, const LogarithmicUtility&) = default;

 private:
  double k_;
  double r_max_;
  double log_norm_;  // log(1 + k r_max)
};

/// Application utility: exactly one of the two parameterizations.
class Utility {
 public:
  using Variant = std::variant<SigmoidalUtility, LogarithmicUtility>;

  Utility(SigmoidalUtility u) : v_(u) {}     // NOLINT(google-explicit-constructor)
  Utility(LogarithmicUtility u) : v_(u) {}   // NOLINT(google-explicit-constructor)

  static Utility sigmoidal(double a, double b) { return SigmoidalUtility(a, b); }
  static Utility logarithmic(double k, double r_max) { return LogarithmicUtility(k, r_max); }

  bool is_sigmoidal() const { return std::holds_alternative<SigmoidalUtility>(v_); }
  const SigmoidalUtility* as_sigmoidal() const { return std::get_if<SigmoidalUtility>(&v_); }
  const LogarithmicUtility* as_logarithmic() const { return std::get_if<LogarithmicUtility>(&v_); }
  const Variant& variant() const { return v_; }

  friend bool operator==(const Utility&, const Utility&) = default;

 private:
  Variant v_;
};

// Satisfaction U(r) for r >= 0. Throws DomainError for negative or non-finite r.
double eval(const Utility& u, double r);

// log U(r) for r > 0, evaluated without forming U first so tiny rates stay
// finite.
double log_eval(const Utility& u, double r);

// S(r) = d log U / dr for r > 0. Strictly positive and strictly decreasing.
double slope(const Utility& u, double r);

// The rate r with S(r) = p, found by monotone bisection on
// [kRateFloor, kRateCap]. Saturates at the bracket ends rather than failing.
double slope_inverse(const Utility& u, double p);

// b for a sigmoid, 0 for the logarithm.
double inflection(const Utility& u);

}  // namespace ratealloc
