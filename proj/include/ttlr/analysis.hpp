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
 * @file analysis.hpp
 * @brief Shape of the binary loss in the margin, and Bayes-consistency
 *        oracles.
 *
 * Binary loss for class c in {+1, -1} at margin a (activations [a/2, -a/2]):
 *
 *   xi(a)   = -log_{t1} p,            p = exp_{t2}(c a/2 - G(a))
 *   xi'(a)  = -p^(t2-t1) (c/2 - G')
 *   xi''(a) =  p^(t2-t1) [G'' - (t2 - t1) p^(t2-1) (c/2 - G')^2]
 *
 * Where p = 0 exactly (t2 < 1, far on the wrong side) the loss is the flat cap
 * 1/(1-t1) if t1 < 1, and +inf otherwise; derivatives there are 0 and NaN
 * respectively.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ttlr/error.hpp"
#include "ttlr/format.hpp"
#include "ttlr/loss.hpp"
#include "ttlr/optimizer.hpp"
#include "ttlr/partition.hpp"
#include "ttlr/tempered_math.hpp"

namespace ttlr {

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct MarginPoint {
  double loss;
  double d1;
  double d2;
  bool zero_prob;  ///< p = 0 exactly
  double residual;
};

inline MarginPoint margin_point(double a, const TemperaturePair& temps, int c) {
  require_binary_label(c);
  const auto s = binary_state(a, temps.t2);
  const double ln_p = s.ln_p[c == 1 ? 0 : 1];
  const double dev = 0.5 * c - s.d1;
  const double gap = temps.gap();
  MarginPoint m{};
  m.loss = -log_t_of_ln(ln_p, temps.t1);
  if (ln_p == kNegInf) {
    m.zero_prob = true;
    const bool capped = temps.t1.value() < 1.0;
    m.d1 = capped ? 0.0 : kNaN;
    m.d2 = capped ? 0.0 : kNaN;
    m.residual = kNaN;
    return m;
  }
  m.zero_prob = false;
  const double factor = std::exp(gap * ln_p);
  m.residual = s.d2 - gap * std::exp((temps.t2.value() - 1.0) * ln_p) * dev * dev;
  m.d1 = -factor * dev;
  m.d2 = factor * m.residual;
  return m;
}

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace detail

/// d xi / da of the binary loss for class c.
inline double loss_first_derivative(double a, const TemperaturePair& temps, int c = 1) {
  return detail::margin_point(a, temps, c).d1;
}

/// d^2 xi / da^2 of the binary loss for class c. Exactly 0 on the capped
/// plateau.
inline double loss_second_derivative(double a, const TemperaturePair& temps, int c = 1) {
  return detail::margin_point(a, temps, c).d2;
}

/// G'' - (t2 - t1) p^(t2-1) (c/2 - G')^2: zero exactly at a smooth
/// inflection point.
inline double inflection_residual(double a, const TemperaturePair& temps, int c = 1) {
  return detail::margin_point(a, temps, c).residual;
}

struct InflectionPoint {
  double margin = 0.0;
  /// True for the kink where the loss meets its flat cap (p becomes 0).
  bool plateau_boundary = false;
  /// inflection_residual at margin; NaN for plateau boundaries.
  double residual = 0.0;
};

enum class Regime { Convex, QuasiConvex };

inline const char* to_string(Regime r) {
  return r == Regime::Convex ? "convex" : "quasi_convex";
}

struct CurvatureReport {
  std::vector<double> grid;
  std::vector<double> loss;
  std::vector<double> first_deriv;
  std::vector<double> second_deriv;
  std::vector<InflectionPoint> inflection_points;
  Regime regime = Regime::Convex;
  /// Smallest finite second derivative on the grid.
  double min_second_deriv = 0.0;
};

inline constexpr double kCurvatureTolerance = 1e-8;

/// Second-derivative profile of the binary loss on an evenly spaced grid,
/// with located inflection points and a numerically determined regime.
///
/// Inflections are (a) sign changes of xi'' between grid points, refined by
/// bisection, and (b) the edge of a capped plateau when the curvature next
/// to it is positive: the loss drops off the flat cap with non-zero slope,
/// a concave kink.
inline CurvatureReport curvature_report(const TemperaturePair& temps, double lo = -20.0,
                                        double hi = 20.0, std::size_t points = 4001,
                                        int c = 1, double tol = kCurvatureTolerance) {
  detail::require(lo < hi && std::isfinite(lo) && std::isfinite(hi),
                  "curvature_report: bad interval");
  detail::require(points >= 3, "curvature_report: need at least 3 grid points");
  detail::require_binary_label(c);
  CurvatureReport r;
  r.grid.resize(points);
  r.loss.resize(points);
  r.first_deriv.resize(points);
  r.second_deriv.resize(points);
  std::vector<char> zero_prob(points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double a = i + 1 == points ? hi : lo + h * static_cast<double>(i);
    const auto m = detail::margin_point(a, temps, c);
    r.grid[i] = a;
    r.loss[i] = m.loss;
    r.first_deriv[i] = m.d1;
    r.second_deriv[i] = m.d2;
    zero_prob[i] = m.zero_prob;
  }

  auto curvature_sign = [&](double a) {
    return detail::sign_of(detail::margin_point(a, temps, c).d2);
  };
  auto bisect = [&](double left, double right, auto&& left_pred) {
    for (int it = 0; it < 200 && right - left > 1e-13 * std::max(1.0, std::abs(left)); ++it) {
      const double mid = 0.5 * (left + right);
      if (left_pred(mid)) {
        left = mid;
      } else {
        right = mid;
      }
    }
    return 0.5 * (left + right);
  };

  // Smooth sign changes, never bridged across a plateau.
  std::ptrdiff_t last = -1;
  for (std::size_t i = 0; i < points; ++i) {
    const double v = r.second_deriv[i];
    if (zero_prob[i] || !std::isfinite(v)) {
      last = -1;
      continue;
    }
    const int s = detail::sign_of(v);
    if (s == 0) continue;
    if (last >= 0 && detail::sign_of(r.second_deriv[last]) != s) {
      const int left_sign = detail::sign_of(r.second_deriv[last]);
      const double root = bisect(r.grid[last], r.grid[i],
                                 [&](double a) { return curvature_sign(a) == left_sign; });
      r.inflection_points.push_back({root, false, inflection_residual(root, temps, c)});
    }
    last = static_cast<std::ptrdiff_t>(i);
  }

  // Plateau edges.
  if (temps.t1.value() < 1.0) {
    for (std::size_t i = 0; i + 1 < points; ++i) {
      if (zero_prob[i] == zero_prob[i + 1]) continue;
      const bool plateau_left = zero_prob[i];
      const double edge = bisect(r.grid[i], r.grid[i + 1], [&](double a) {
        return detail::margin_point(a, temps, c).zero_prob == plateau_left;
      });
      int side = 0;
      if (plateau_left) {
        for (std::size_t k = i + 1; k < points && side == 0 && !zero_prob[k]; ++k) {
          side = detail::sign_of(r.second_deriv[k]);
        }
      } else {
        for (std::size_t k = i + 1; k-- > 0 && side == 0 && !zero_prob[k];) {
          side = detail::sign_of(r.second_deriv[k]);
        }
      }
      if (side > 0) r.inflection_points.push_back({edge, true, detail::kNaN});
    }
  }
  std::sort(r.inflection_points.begin(), r.inflection_points.end(),
            [](const auto& x, const auto& y) { return x.margin < y.margin; });

  r.min_second_deriv = std::numeric_limits<double>::infinity();
  for (double v : r.second_deriv) {
    if (std::isfinite(v)) r.min_second_deriv = std::min(r.min_second_deriv, v);
  }
  r.regime = r.inflection_points.empty() && r.min_second_deriv >= -tol ? Regime::Convex
                                                                        : Regime::QuasiConvex;
  return r;
}

/// Inflection points of the binary loss for class c inside [lo, hi]. Only
/// meaningful in the quasi-convex regime (t1 < t2 or t1 < 1).
inline std::vector<InflectionPoint> find_inflection(const TemperaturePair& temps, double lo,
                                                    double hi, int c = 1,
                                                    std::size_t points = 4001) {
  detail::require(!temps.convex_by_theory(),
                  "find_inflection: loss is convex for t1 >= t2 and t1 >= 1");
  return curvature_report(temps, lo, hi, points, c).inflection_points;
}

inline void write_curvature_csv(std::ostream& out, const CurvatureReport& r) {
  out << "margin,loss,first_deriv,second_deriv\n";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    out << format_double(r.grid[i]) << ',' << format_double(r.loss[i]) << ','
        << format_double(r.first_deriv[i]) << ',' << format_double(r.second_deriv[i])
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Bayes consistency

/// eta xi(a, +1) + (1 - eta) xi(a, -1).
inline double expected_binary_loss(double a, double eta, const TemperaturePair& temps) {
  const auto s = detail::binary_state(a, temps.t2);
  return -eta * detail::log_t_of_ln(s.ln_p[0], temps.t1) -
         (1.0 - eta) * detail::log_t_of_ln(s.ln_p[1], temps.t1);
}

/// Closed-form minimizer of the expected binary loss: the margin whose
/// tempered probability equals eta^(1/t1) / (eta^(1/t1) + (1-eta)^(1/t1)).
inline double bayes_margin_closed_form(double eta, const TemperaturePair& temps) {
  detail::require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  const double r = 1.0 / temps.t1.value();
  const double pos = std::pow(eta, r);
  const double neg = std::pow(1.0 - eta, r);
  const double z = pos + neg;
  return log_t(pos / z, temps.t2) - log_t(neg / z, temps.t2);
}

struct BayesCheck {
  double eta = 0.5;
  double a_star_numeric = 0.0;
  double a_star_closed_form = 0.0;
  bool sign_consistent = false;
};

/// Numeric argmin of the expected binary loss over [-50, 50]: a 10^4-step
/// grid, golden-section refinement, then bisection on the analytic
/// derivative inside the refined bracket.
inline BayesCheck bayes_binary_check(double eta, const TemperaturePair& temps) {
  detail::require(eta > 0.0 && eta < 1.0, "bayes_binary_check: eta must lie in (0, 1)");
  const double lo = -50.0, hi = 50.0;
  const std::size_t steps = 10000;
  const double h = (hi - lo) / static_cast<double>(steps);
  auto E = [&](double a) { return expected_binary_loss(a, eta, temps); };
  auto dE = [&](double a) {
    const auto s = detail::binary_state(a, temps.t2);
    const double d1 = s.d1;
    auto term = [&](int idx, double half_c) {
      if (s.ln_p[idx] == detail::kNegInf) return 0.0;
      return -std::exp(temps.gap() * s.ln_p[idx]) * (half_c - d1);
    };
    return eta * term(0, 0.5) + (1.0 - eta) * term(1, -0.5);
  };

  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= steps; ++i) {
    const double v = E(lo + h * static_cast<double>(i));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double left = lo + h * static_cast<double>(best == 0 ? 0 : best - 1);
  double right = lo + h * static_cast<double>(std::min(best + 1, steps));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = right - inv_phi * (right - left);
  double x2 = left + inv_phi * (right - left);
  double f1 = E(x1), f2 = E(x2);
  while (right - left > 1e-8) {
    if (f1 <= f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - inv_phi * (right - left);
      f1 = E(x1);
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + inv_phi * (right - left);
      f2 = E(x2);
    }
  }
  double a_star = 0.5 * (left + right);

  double bl = std::max(lo, a_star - h), br = std::min(hi, a_star + h);
  if (dE(bl) < 0.0 && dE(br) > 0.0) {
    for (int it = 0; it < 200 && br - bl > 1e-13 * std::max(1.0, std::abs(bl)); ++it) {
      const double mid = 0.5 * (bl + br);
      const double d = dE(mid);
      if (d == 0.0) {
        bl = br = mid;
        break;
      }
      (d < 0.0 ? bl : br) = mid;
    }
    a_star = 0.5 * (bl + br);
  }

  BayesCheck out;
  out.eta = eta;
  out.a_star_numeric = a_star;
  out.a_star_closed_form = bayes_margin_closed_form(eta, temps);
  if (std::abs(eta - 0.5) < 1e-12) {
    out.sign_consistent = std::abs(a_star) <= 1e-6;
  } else {
    out.sign_consistent = detail::sign_of(a_star) == detail::sign_of(eta - 0.5);
  }
  return out;
}

inline void write_bayes_csv(std::ostream& out, const TemperaturePair& temps,
                            std::span<const BayesCheck> checks) {
  out << "eta,t1,t2,a_star_numeric,a_star_closed_form,sign_consistent\n";
  for (const auto& c : checks) {
    out << format_double(c.eta) << ',' << format_double(temps.t1.value()) << ','
        << format_double(temps.t2.value()) << ',' << format_double(c.a_star_numeric) << ','
        << format_double(c.a_star_closed_form) << ',' << (c.sign_consistent ? 1 : 0) << '\n';
  }
}

struct MulticlassBayesCheck {
  std::vector<double> a_star;   ///< zero-sum minimizing activations
  std::vector<double> probs;    ///< tempered_probs(a_star)
  std::vector<double> target;   ///< p^(1/t1), renormalized
  double max_deviation = 0.0;   ///< max_c |probs_c - target_c|
  bool argmax_preserved = false;
  OptimizationTrace trace;
};

/// -sum_c p_c log_{t1} exp_{t2}(a_c - G(a)) and its gradient in a.
inline double expected_multiclass_loss(std::span<const double> a, std::span<const double> p,
                                       const TemperaturePair& temps, std::span<double> grad) {
  std::vector<double> b(a.begin(), a.end());
  const auto sp = detail::partition_inplace(b, temps.t2);
  const double Gs = sp.result.G;
  const std::size_t C = b.size();
  std::vector<double> ln_p(C), w(C);
  double z = 0.0, value = 0.0, weighted = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    ln_p[c] = detail::ln_exp_t(b[c] - Gs, temps.t2);
    w[c] = ln_p[c] == detail::kNegInf ? 0.0 : std::exp(temps.t2.value() * ln_p[c]);
    z += w[c];
    value -= p[c] * detail::log_t_of_ln(ln_p[c], temps.t1);
  }
  if (!grad.empty()) {
    std::vector<double> f(C);
    for (std::size_t c = 0; c < C; ++c) {
      f[c] = ln_p[c] == detail::kNegInf ? 0.0 : std::exp(temps.gap() * ln_p[c]);
      weighted += p[c] * f[c];
    }
    for (std::size_t j = 0; j < C; ++j) grad[j] = -p[j] * f[j] + (w[j] / z) * weighted;
  }
  return value;
}

/// Minimizes the expected multiclass loss under sum_c a_c = 0 (the last
/// coordinate is minus the sum of the others) and compares the resulting
/// tempered probabilities with p^(1/t1). For t2 < 1 a class whose
/// probability reaches 0 contributes a constant, so the search can stop on
/// that flat region; `trace.reason` then reads line_search_failure.
inline MulticlassBayesCheck bayes_multiclass_check(std::span<const double> p,
                                                   const TemperaturePair& temps) {
  detail::require_distribution(p, "bayes_multiclass_check");
  detail::require(p.size() >= 2, "bayes_multiclass_check: need at least two classes");
  for (double v : p) detail::require(v > 0.0, "bayes_multiclass_check: p must be strictly positive");
  const std::size_t C = p.size();

  auto expand = [C](std::span<const double> z, std::vector<double>& a) {
    double sum = 0.0;
    for (std::size_t j = 0; j + 1 < C; ++j) {
      a[j] = z[j];
      sum += z[j];
    }
    a[C - 1] = -sum;
  };
  std::vector<double> a(C), ga(C);
  auto objective = [&](std::span<const double> z, std::span<double> gz) {
    expand(z, a);
    const double v = expected_multiclass_loss(a, p, temps, ga);
    for (std::size_t j = 0; j + 1 < C; ++j) gz[j] = ga[j] - ga[C - 1];
    return v;
  };
  OptimizerConfig cfg;
  cfg.max_iters = 5000;
  cfg.grad_tol = 1e-12;
  auto result = lbfgs_minimize(objective, std::vector<double>(C - 1, 0.0), cfg);

  MulticlassBayesCheck out;
  out.a_star.resize(C);
  expand(result.x, out.a_star);
  out.probs = tempered_probs(out.a_star, temps.t2);
  out.target.resize(C);
  double z = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    out.target[c] = std::pow(p[c], 1.0 / temps.t1.value());
    z += out.target[c];
  }
  for (double& v : out.target) v /= z;
  for (std::size_t c = 0; c < C; ++c) {
    out.max_deviation = std::max(out.max_deviation, std::abs(out.probs[c] - out.target[c]));
  }
  const auto argmax = [](std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  out.argmax_preserved = argmax(out.a_star) == argmax(p);
  out.trace = std::move(result.trace);
  return out;
}

}  // namespace ttlr
