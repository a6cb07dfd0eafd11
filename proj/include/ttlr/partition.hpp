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
 * @file partition.hpp
 * @brief Tempered log-partition G_t(a), tempered probabilities and escorts.
 *
 * G_t(a) is the unique shift with sum_c exp_t(a_c - G) = 1. For t != 1 it has
 * no closed form; we solve it with Newton's method started at the left end of
 * the bracket [max a, max a - log_t(1/C)]. The residual is convex and
 * decreasing in G, so Newton iterates from the left never overshoot; a
 * bisection fallback guards against rounding at the right end.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "ttlr/error.hpp"
#include "ttlr/tempered_math.hpp"

namespace ttlr {

inline constexpr double kNormalizationTolerance = 1e-12;
inline constexpr double kPartitionResidualTarget = 1e-13;
inline constexpr int kPartitionMaxIterations = 200;

struct PartitionResult {
  double G = 0.0;
  /// |sum_c exp_t(a_c - G) - 1| at the returned G.
  double residual = 0.0;
  int iterations = 0;
};

namespace detail {

inline void require_activations(std::span<const double> a) {
  require(a.size() >= 2, "activation vector needs at least two classes");
  for (double v : a) require(std::isfinite(v), "activations must be finite");
}

/// Normalizer for activations already shifted so that max_c b_c == 0.
inline PartitionResult solve_shifted_partition(std::span<const double> b,
                                               Temperature t) {
  const double tv = t.value();
  auto evaluate = [&](double G, double& slope) {
    double sum = 0.0;
    slope = 0.0;
    for (double bc : b) {
      const double l = ln_exp_t(bc - G, t);
      if (l == -std::numeric_limits<double>::infinity()) continue;
      sum += std::exp(l);
      slope += std::exp(tv * l);
    }
    return sum - 1.0;
  };

  if (t.gap_from_one() == 0.0) {
    double s = 0.0;
    for (double bc : b) s += std::exp(bc);
    const double G = std::log(s);
    double slope = 0.0;
    return {G, std::abs(evaluate(G, slope)), 0};
  }

  double lo = 0.0;
  double hi = -log_t(1.0 / static_cast<double>(b.size()), t);
  double G = lo;
  double slope = 0.0;
  double f = evaluate(G, slope);
  int it = 0;
  while (it < kPartitionMaxIterations) {
    if (std::abs(f) <= kPartitionResidualTarget) break;
    ++it;
    if (f > 0.0) {
      lo = G;
    } else {
      hi = G;
    }
    double next = G + f / slope;
    if (!(next > lo && next <= hi)) next = 0.5 * (lo + hi);
    if (next == G) break;
    G = next;
    f = evaluate(G, slope);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, std::abs(G))) {
      break;
    }
  }
  const double residual = std::abs(f);
  if (!(residual <= kNormalizationTolerance)) {
    throw SolverError("log_partition: failed to normalize (residual " +
                      std::to_string(residual) + ")");
  }
  return {G, residual, it};
}

/// Shifts `a` in place by its maximum and returns the normalizer of the
/// shifted vector together with the shift.
struct ShiftedPartition {
  PartitionResult result;
  double shift = 0.0;
};

inline ShiftedPartition partition_inplace(std::span<double> a, Temperature t) {
  const double m = *std::max_element(a.begin(), a.end());
  for (double& v : a) v -= m;
  return {solve_shifted_partition(a, t), m};
}

/// Everything the two-class analysis needs at margin a, activations
/// [a/2, -a/2]. Index 0 is the class c = +1.
struct BinaryState {
  double G = 0.0;
  double ln_p[2] = {0.0, 0.0};
  double p[2] = {0.0, 0.0};
  double d1 = 0.0;
  double d2 = 0.0;
};

inline BinaryState binary_state(double a, Temperature t) {
  require(std::isfinite(a), "margin must be finite");
  double act[2] = {0.5 * a, -0.5 * a};
  const auto sp = partition_inplace(act, t);
  BinaryState s;
  s.G = sp.result.G + sp.shift;
  const double tv = t.value();
  double z = 0.0;
  double num = 0.0;
  double w[2];
  for (int i = 0; i < 2; ++i) {
    s.ln_p[i] = ln_exp_t(act[i] - sp.result.G, t);
    s.p[i] = std::exp(s.ln_p[i]);
    w[i] = std::exp(tv * s.ln_p[i]);
    z += w[i];
    num += (i == 0 ? 0.5 : -0.5) * w[i];
  }
  s.d1 = num / z;
  double acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (s.p[i] == 0.0) continue;
    const double dev = (i == 0 ? 0.5 : -0.5) - s.d1;
    acc += std::exp((2.0 * tv - 1.0) * s.ln_p[i]) * dev * dev;
  }
  s.d2 = tv * acc / z;
  return s;
}

}  // namespace detail

/// G_{t2}(a): the tempered log-partition value of activation vector a.
inline PartitionResult log_partition(std::span<const double> a, Temperature t2) {
  detail::require_activations(a);
  std::vector<double> b(a.begin(), a.end());
  auto sp = detail::partition_inplace(b, t2);
  sp.result.G += sp.shift;
  return sp.result;
}

/// Tempered class probabilities exp_{t2}(a_c - G_{t2}(a)). Exact zeros past
/// the support boundary when t2 < 1.
inline std::vector<double> tempered_probs(std::span<const double> a,
                                          Temperature t2) {
  detail::require_activations(a);
  std::vector<double> p(a.begin(), a.end());
  const auto sp = detail::partition_inplace(p, t2);
  for (double& v : p) v = exp_t(v - sp.result.G, t2);
  return p;
}

/// Escort distribution q_c = p_c^t / sum_j p_j^t.
inline std::vector<double> escort(std::span<const double> p, Temperature t) {
  detail::require_distribution(p, "escort");
  std::vector<double> q(p.size());
  double z = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    q[c] = p[c] == 0.0 ? 0.0 : std::pow(p[c], t.value());
    z += q[c];
  }
  detail::require(z > 0.0, "escort: all-zero probability vector");
  for (double& v : q) v /= z;
  return q;
}

/// dG/da for the two-class activations [a/2, -a/2]: the escort mean of c/2.
inline double partition_d1(double a, Temperature t2) {
  return detail::binary_state(a, t2).d1;
}

/// d^2G/da^2 for the two-class activations [a/2, -a/2]. Non-negative.
inline double partition_d2(double a, Temperature t2) {
  return detail::binary_state(a, t2).d2;
}

}  // namespace ttlr
