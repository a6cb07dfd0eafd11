// Copyright 2026 The TTLR Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/**
 * @file tempered_math.hpp
 * @brief Tempered logarithm / exponential and discrete Tsallis measures.
 *
 *   log_t(x) = (x^(1-t) - 1) / (1-t)
 *   exp_t(x) = [1 + (1-t) x]_+^(1/(1-t))
 *
 * Both are evaluated through expm1/log1p so that temperatures arbitrarily
 * close to 1 keep full precision; t == 1 exactly falls back to log/exp.
 */

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include "ttlr/error.hpp"

namespace ttlr {

/// Tempering parameter, validated once at construction: 0 < t < 2.
class Temperature {
 public:
  explicit Temperature(double t) : t_(t) {
    if (!(t > 0.0 && t < 2.0)) {
      throw ContractViolation("temperature must lie in (0, 2), got " +
                              std::to_string(t));
    }
  }

  double value() const noexcept { return t_; }
  /// 1 - t, the exponent that appears everywhere in the tempered kernels.
  double gap_from_one() const noexcept { return 1.0 - t_; }

  friend bool operator==(Temperature, Temperature) = default;

 private:
  double t_;
};

/// Tolerance used when validating user-supplied probability vectors.
inline constexpr double kDistributionTolerance = 1e-9;

/// Tempered logarithm. x = 0 is admitted for t < 1 and returns the finite
/// limit -1/(1-t); any other non-positive x throws std::domain_error.
inline double log_t(double x, Temperature t) {
  const double k = t.gap_from_one();
  if (!(x > 0.0)) {
    if (x == 0.0 && k > 0.0) return -1.0 / k;
    throw std::domain_error("log_t: argument must be positive");
  }
  if (k == 0.0) return std::log(x);
  return std::expm1(k * std::log(x)) / k;
}

/// Tempered exponential. Returns exactly 0 past the support boundary for
/// t < 1, and +inf past the pole for t > 1.
inline double exp_t(double x, Temperature t) {
  const double k = t.gap_from_one();
  if (k == 0.0) return std::exp(x);
  const double kx = k * x;
  if (kx <= -1.0) {
    return k > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::exp(std::log1p(kx) / k);
}

namespace detail {

/// ln(exp_t(x)); -inf inside the clamp region.
inline double ln_exp_t(double x, Temperature t) {
  const double k = t.gap_from_one();
  if (k == 0.0) return x;
  const double kx = k * x;
  if (kx <= -1.0) {
    return k > 0.0 ? -std::numeric_limits<double>::infinity()
                   : std::numeric_limits<double>::infinity();
  }
  return std::log1p(kx) / k;
}

/// log_t(exp(ln_x)) without forming exp(ln_x); ln_x = -inf maps to log_t(0).
inline double log_t_of_ln(double ln_x, Temperature t) {
  const double k = t.gap_from_one();
  if (k == 0.0) return ln_x;
  return std::expm1(k * ln_x) / k;
}

inline void require_distribution(std::span<const double> p, const char* name) {
  require(!p.empty(), std::string(name) + ": empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    require(std::isfinite(v) && v >= 0.0,
            std::string(name) + ": entries must be finite and non-negative");
    sum += v;
  }
  require(std::abs(sum - 1.0) <= kDistributionTolerance,
          std::string(name) + ": probabilities must sum to 1");
}

}  // namespace detail

/// Discrete Tsallis entropy sum_c p_c log_t(1/p_c); zero-probability terms
/// contribute nothing.
inline double tsallis_entropy(std::span<const double> p, Temperature t) {
  detail::require_distribution(p, "tsallis_entropy");
  double h = 0.0;
  for (double pc : p) {
    if (pc == 0.0) continue;
    h += pc * log_t(1.0 / pc, t);
  }
  return h;
}

/// Discrete Tsallis divergence -sum_c p_c log_t(q_c / p_c). Reduces to KL at
/// t = 1. Infinite when q misses support of p and t >= 1.
inline double tsallis_divergence(std::span<const double> p,
                                 std::span<const double> q, Temperature t) {
  detail::require(p.size() == q.size(),
                  "tsallis_divergence: length mismatch");
  detail::require_distribution(p, "tsallis_divergence(p)");
  detail::require_distribution(q, "tsallis_divergence(q)");
  double d = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (p[c] == 0.0) continue;
    if (q[c] == 0.0 && t.value() >= 1.0) {
      return std::numeric_limits<double>::infinity();
    }
    d -= p[c] * log_t(q[c] / p[c], t);
  }
  return d;
}

}  // namespace ttlr
