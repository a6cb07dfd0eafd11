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
 * @file loss.hpp
 * @brief Two-temperature logistic loss and gradients.
 *
 * Per example with activations a = W^T x and class c:
 *
 *   loss  = -log_{t1} exp_{t2}(a_c - G_{t2}(a))
 *   dloss/da_j = -p_c^(t2 - t1) * (1{j == c} - q_j)
 *
 * where p = tempered_probs(a, t2) and q is its escort. p_c is carried in log
 * space from the margin a_c - G, so neither the loss nor the importance
 * factor p_c^(t2 - t1) underflows.
 */

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "ttlr/error.hpp"
#include "ttlr/partition.hpp"
#include "ttlr/tempered_math.hpp"
#include "ttlr/types.hpp"

namespace ttlr {

/// (t1, t2): temperature of the logarithm and of the exponential.
struct TemperaturePair {
  Temperature t1;
  Temperature t2;

  TemperaturePair(double log_temp, double exp_temp)
      : t1(log_temp), t2(exp_temp) {}
  TemperaturePair(Temperature log_temp, Temperature exp_temp)
      : t1(log_temp), t2(exp_temp) {}

  /// t2 - t1, the exponent of the per-example importance factor.
  double gap() const noexcept { return t2.value() - t1.value(); }

  /// Convex iff t1 >= t2 and t1 >= 1; quasi-convex otherwise.
  bool convex_by_theory() const noexcept {
    return t1.value() >= t2.value() && t1.value() >= 1.0;
  }

  /// Loss of an example with probability 0 when t1 < 1: 1/(1 - t1).
  double loss_cap() const noexcept {
    return t1.value() < 1.0 ? 1.0 / t1.gap_from_one()
                            : std::numeric_limits<double>::infinity();
  }

  friend bool operator==(const TemperaturePair&, const TemperaturePair&) = default;
};

namespace detail {

/// p = 0 at the true class with t1 >= 1 and t2 <= t1: gradient undefined.
inline bool gradient_undefined_at_saturation(const TemperaturePair& temps) {
  return temps.t1.value() >= 1.0 && temps.t2.value() <= temps.t1.value();
}

/// Loss of one example given its activations. `a` is clobbered (shifted in
/// place). If `dloss_da` is non-empty it receives d loss / d a. Returns +inf
/// without touching `dloss_da` when the gradient is undefined.
inline double example_loss(std::span<double> a, std::size_t label,
                           const TemperaturePair& temps,
                           std::span<double> dloss_da) {
  const Temperature t2 = temps.t2;
  const auto sp = partition_inplace(a, t2);
  const double Gs = sp.result.G;
  const double ln_p = ln_exp_t(a[label] - Gs, t2);
  const double loss = -log_t_of_ln(ln_p, temps.t1);
  if (dloss_da.empty()) return loss;

  if (ln_p == -std::numeric_limits<double>::infinity()) {
    if (gradient_undefined_at_saturation(temps)) {
      return std::numeric_limits<double>::infinity();
    }
    for (double& g : dloss_da) g = 0.0;
    return loss;
  }
  const double factor = std::exp(temps.gap() * ln_p);
  const double tv = t2.value();
  double z = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double l = ln_exp_t(a[c] - Gs, t2);
    dloss_da[c] = l == -std::numeric_limits<double>::infinity()
                      ? 0.0
                      : std::exp(tv * l);
    z += dloss_da[c];
  }
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double q = dloss_da[c] / z;
    dloss_da[c] = -factor * ((c == label ? 1.0 : 0.0) - q);
  }
  return loss;
}

inline void require_compatible(const Example& ex, const WeightMatrix& W) {
  require(W.num_classes() >= 2, "weight matrix needs at least two classes");
  require(ex.label < W.num_classes(), "example label out of range");
  require(ex.x.indices.empty() || ex.x.indices.back() < W.dim(),
          "example feature index exceeds weight matrix dimension");
}

inline void require_binary_label(int c) {
  require(c == 1 || c == -1, "binary label must be +1 or -1");
}

inline double dot(const SparseVector& x, std::span<const double> w) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    require(x.indices[k] < w.size(), "feature index exceeds weight dimension");
    s += x.values[k] * w[x.indices[k]];
  }
  return s;
}

}  // namespace detail

/// Per-example TTLR loss. Non-negative; capped by 1/(1 - t1) when t1 < 1;
/// +inf at exact saturation (p = 0) when t1 >= 1.
inline double surrogate_loss(const Example& ex, const WeightMatrix& W,
                             const TemperaturePair& temps) {
  detail::require_compatible(ex, W);
  auto a = W.activations(ex.x);
  return detail::example_loss(a, ex.label, temps, {});
}

/// Gradient of surrogate_loss with respect to W (d x C). Zero at exact
/// saturation when the loss is locally flat; throws SaturationError when the
/// limit does not exist.
inline WeightMatrix surrogate_grad(const Example& ex, const WeightMatrix& W,
                                   const TemperaturePair& temps) {
  detail::require_compatible(ex, W);
  auto a = W.activations(ex.x);
  std::vector<double> g(a.size());
  const double loss = detail::example_loss(a, ex.label, temps, g);
  if (loss == std::numeric_limits<double>::infinity() &&
      detail::gradient_undefined_at_saturation(temps)) {
    throw SaturationError("surrogate_grad: example saturated (p = 0)");
  }
  WeightMatrix grad(W.dim(), W.num_classes());
  for (std::size_t k = 0; k < ex.x.nnz(); ++k) {
    for (std::size_t c = 0; c < g.size(); ++c) {
      grad(ex.x.indices[k], c) = g[c] * ex.x.values[k];
    }
  }
  return grad;
}

/// Two-class loss in the single-vector parameterization: activations
/// [<x,w>/2, -<x,w>/2], c in {+1, -1}.
inline double binary_loss(const SparseVector& x, int c, std::span<const double> w,
                          const TemperaturePair& temps) {
  detail::require_binary_label(c);
  const double a = detail::dot(x, w);
  const auto s = detail::binary_state(a, temps.t2);
  return -detail::log_t_of_ln(s.ln_p[c == 1 ? 0 : 1], temps.t1);
}

/// -p^(t2 - t1) (c/2 - dG/da) x.
inline std::vector<double> binary_grad(const SparseVector& x, int c,
                                       std::span<const double> w,
                                       const TemperaturePair& temps) {
  detail::require_binary_label(c);
  const double a = detail::dot(x, w);
  const auto s = detail::binary_state(a, temps.t2);
  const double ln_p = s.ln_p[c == 1 ? 0 : 1];
  std::vector<double> grad(w.size(), 0.0);
  double coef = 0.0;
  if (ln_p == -std::numeric_limits<double>::infinity()) {
    if (detail::gradient_undefined_at_saturation(temps)) {
      throw SaturationError("binary_grad: example saturated (p = 0)");
    }
  } else {
    coef = -std::exp(temps.gap() * ln_p) * (0.5 * c - s.d1);
  }
  for (std::size_t k = 0; k < x.nnz(); ++k) {
    grad[x.indices[k]] = coef * x.values[k];
  }
  return grad;
}

struct ObjectiveValue {
  double value = 0.0;
  WeightMatrix gradient;
};

namespace detail {

/// Mean loss plus (lambda/2)||W||^2 over flat row-major weights; writes the
/// gradient into `grad`. Returns +inf (gradient unspecified) if any example
/// sits at an undefined-gradient saturation point.
inline double objective_flat(const Dataset& data, std::span<const double> w,
                             const TemperaturePair& temps, double lambda,
                             std::span<double> grad) {
  const std::size_t C = data.num_classes;
  for (double& g : grad) g = 0.0;
  std::vector<double> a(C);
  std::vector<double> g(C);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  double total = 0.0;
  for (const auto& ex : data.examples) {
    for (double& v : a) v = 0.0;
    for (std::size_t k = 0; k < ex.x.nnz(); ++k) {
      const double* row = w.data() + std::size_t{ex.x.indices[k]} * C;
      for (std::size_t c = 0; c < C; ++c) a[c] += ex.x.values[k] * row[c];
    }
    const double loss = example_loss(a, ex.label, temps, g);
    if (loss == std::numeric_limits<double>::infinity()) {
      return std::numeric_limits<double>::infinity();
    }
    total += loss;
    for (std::size_t k = 0; k < ex.x.nnz(); ++k) {
      double* row = grad.data() + std::size_t{ex.x.indices[k]} * C;
      const double xv = inv_n * ex.x.values[k];
      for (std::size_t c = 0; c < C; ++c) row[c] += xv * g[c];
    }
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sq += w[i] * w[i];
    grad[i] += lambda * w[i];
  }
  return total * inv_n + 0.5 * lambda * sq;
}

inline void require_objective_inputs(const Dataset& data, const WeightMatrix& W,
                                     double lambda) {
  require(!data.empty(), "objective: empty dataset");
  require(lambda >= 0.0 && std::isfinite(lambda), "objective: lambda must be >= 0");
  require(W.dim() == data.dim && W.num_classes() == data.num_classes,
          "objective: weight matrix shape does not match dataset");
}

}  // namespace detail

/// (1/N) sum_n loss_n + (lambda/2)||W||_F^2 and its gradient, summed in
/// example order.
inline ObjectiveValue regularized_objective(const Dataset& data,
                                            const WeightMatrix& W,
                                            const TemperaturePair& temps,
                                            double lambda) {
  detail::require_objective_inputs(data, W, lambda);
  ObjectiveValue out{0.0, WeightMatrix(W.dim(), W.num_classes())};
  out.value = detail::objective_flat(data, W.flat(), temps, lambda,
                                     out.gradient.flat());
  if (out.value == std::numeric_limits<double>::infinity()) {
    throw SaturationError("regularized_objective: saturated example");
  }
  return out;
}

}  // namespace ttlr
