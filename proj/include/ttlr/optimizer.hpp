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
 * @file optimizer.hpp
 * @brief Deterministic limited-memory BFGS with backtracking Armijo search.
 *
 * The objective is any callable `double f(std::span<const double> x,
 * std::span<double> grad)` that returns the value and writes the gradient.
 * Curvature pairs with s'y <= 1e-12 |s||y| are dropped so the implicit
 * inverse Hessian stays positive definite; this is what lets the same driver
 * run on the non-convex (t1 < t2) objectives.
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "ttlr/error.hpp"

namespace ttlr {

struct LineSearchConfig {
  double c1 = 1e-4;           ///< Armijo sufficient-decrease constant
  double backtrack = 0.5;     ///< step shrink factor
  int max_backtracks = 50;
};

struct OptimizerConfig {
  std::size_t memory = 10;
  std::size_t max_iters = 500;
  double grad_tol = 1e-6;     ///< on the gradient sup-norm
  LineSearchConfig line_search;
  /// Stop when an accepted step changes the objective, or moves any
  /// coordinate, by less than this. 0 disables the test.
  double progress_tol = 0.0;

  void validate() const {
    detail::require(memory >= 1, "optimizer: memory must be >= 1");
    detail::require(grad_tol > 0.0, "optimizer: grad_tol must be > 0");
    detail::require(progress_tol >= 0.0, "optimizer: progress_tol must be >= 0");
    detail::require(line_search.c1 > 0.0 && line_search.c1 < 1.0,
                    "optimizer: Armijo constant must lie in (0, 1)");
    detail::require(line_search.backtrack > 0.0 && line_search.backtrack < 1.0,
                    "optimizer: backtrack factor must lie in (0, 1)");
    detail::require(line_search.max_backtracks >= 1,
                    "optimizer: max_backtracks must be >= 1");
  }
};

enum class Termination {
  GradientTolerance,
  MaxIterations,
  LineSearchFailure,
  NoProgress,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchFailure: return "line_search_failure";
    case Termination::NoProgress: return "no_progress";
  }
  return "unknown";
}

struct IterationRecord {
  double value = 0.0;
  double grad_norm = 0.0;  ///< sup-norm
  double step = 0.0;       ///< accepted step length; 0 for the initial point

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// records[0] is the initial point; every later record is an accepted step.
struct OptimizationTrace {
  std::vector<IterationRecord> records;
  Termination reason = Termination::MaxIterations;
  std::vector<std::string> warnings;

  std::size_t iterations() const noexcept {
    return records.empty() ? 0 : records.size() - 1;
  }
};

struct OptimizationResult {
  std::vector<double> x;
  double value = 0.0;
  OptimizationTrace trace;
};

template <class F>
concept ValueAndGradient =
    requires(F f, std::span<const double> x, std::span<double> g) {
      { f(x, g) } -> std::convertible_to<double>;
    };

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: d = -H g.
inline void lbfgs_direction(const std::deque<CurvaturePair>& history,
                            std::span<const double> g, std::vector<double>& d) {
  d.assign(g.begin(), g.end());
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    const auto& p = history[i];
    alpha[i] = p.rho * dot(p.s, d);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] -= alpha[i] * p.y[k];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : d) v *= gamma;
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& p = history[i];
    const double beta = p.rho * dot(p.y, d);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += (alpha[i] - beta) * p.s[k];
  }
  for (double& v : d) v = -v;
}

}  // namespace detail

/// Minimizes `objective` from `init`. Never returns a point worse than init;
/// line-search failure ends the run with the best point so far and is
/// reported in the trace, not thrown.
template <ValueAndGradient F>
OptimizationResult lbfgs_minimize(F&& objective, std::vector<double> init,
                                  const OptimizerConfig& config = {}) {
  config.validate();
  const std::size_t n = init.size();
  OptimizationResult out;
  out.x = std::move(init);
  std::vector<double> g(n);
  double f = objective(std::span<const double>(out.x), std::span<double>(g));
  detail::require(std::isfinite(f) && detail::all_finite(g),
                  "lbfgs_minimize: objective is not finite at the initial point");
  auto& trace = out.trace;
  trace.records.push_back({f, detail::sup_norm(g), 0.0});

  std::deque<detail::CurvaturePair> history;
  std::vector<double> d(n), x_new(n), g_new(n);
  const auto& ls = config.line_search;
  bool done = false;
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    if (detail::sup_norm(g) <= config.grad_tol) {
      trace.reason = Termination::GradientTolerance;
      done = true;
      break;
    }
    detail::lbfgs_direction(history, g, d);
    double gd = detail::dot(g, d);
    if (!(gd < 0.0)) {
      history.clear();
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
      gd = -detail::dot(g, g);
    }
    double step = 1.0;
    if (history.empty()) {
      double l1 = 0.0;
      for (double v : g) l1 += std::abs(v);
      step = std::min(1.0, 1.0 / l1);
    }

    bool accepted = false;
    double f_new = f;
    for (int k = 0; k < ls.max_backtracks; ++k) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = out.x[i] + step * d[i];
      f_new = objective(std::span<const double>(x_new), std::span<double>(g_new));
      if (std::isfinite(f_new) && f_new < f && f_new <= f + ls.c1 * step * gd &&
          detail::all_finite(g_new)) {
        accepted = true;
        break;
      }
      step *= ls.backtrack;
    }
    if (!accepted) {
      trace.reason = Termination::LineSearchFailure;
      done = true;
      break;
    }

    detail::CurvaturePair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    double max_move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = x_new[i] - out.x[i];
      pair.y[i] = g_new[i] - g[i];
      max_move = std::max(max_move, std::abs(pair.s[i]));
    }
    const double sy = detail::dot(pair.s, pair.y);
    const double s_norm = std::sqrt(detail::dot(pair.s, pair.s));
    const double y_norm = std::sqrt(detail::dot(pair.y, pair.y));
    if (sy > 1e-12 * s_norm * y_norm) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > config.memory) history.pop_front();
    }

    const double f_prev = f;
    out.x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    trace.records.push_back({f, detail::sup_norm(g), step});

    if (config.progress_tol > 0.0 &&
        (f_prev - f < config.progress_tol || max_move < config.progress_tol)) {
      trace.reason = detail::sup_norm(g) <= config.grad_tol
                         ? Termination::GradientTolerance
                         : Termination::NoProgress;
      done = true;
      break;
    }
  }
  if (!done) {
    trace.reason = detail::sup_norm(g) <= config.grad_tol
                       ? Termination::GradientTolerance
                       : Termination::MaxIterations;
  }
  out.value = f;
  return out;
}

}  // namespace ttlr
