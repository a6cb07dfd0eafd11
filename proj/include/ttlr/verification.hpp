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
 * @file verification.hpp
 * @brief Self-check batteries run by `ttlr verify`: curvature, bayes,
 *        gradients, recovery. Each check reports a measured residual and
 *        the tolerance it was held to.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ttlr/analysis.hpp"
#include "ttlr/error.hpp"
#include "ttlr/format.hpp"
#include "ttlr/loss.hpp"
#include "ttlr/partition.hpp"
#include "ttlr/random.hpp"
#include "ttlr/types.hpp"

namespace ttlr {

enum class Suite { Curvature, Bayes, Gradients, Recovery };

inline const char* to_string(Suite s) {
  switch (s) {
    case Suite::Curvature: return "curvature";
    case Suite::Bayes: return "bayes";
    case Suite::Gradients: return "gradients";
    case Suite::Recovery: return "recovery";
  }
  return "unknown";
}

inline Suite parse_suite(std::string_view s) {
  if (s == "curvature") return Suite::Curvature;
  if (s == "bayes") return Suite::Bayes;
  if (s == "gradients") return Suite::Gradients;
  if (s == "recovery") return Suite::Recovery;
  throw ContractViolation("unknown suite '" + std::string(s) +
                          "' (expected curvature, bayes, gradients or recovery)");
}

struct VerificationCheck {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
  }
  void add(Suite s, std::string name, double measured, double tolerance) {
    checks.push_back({to_string(s), std::move(name), measured, tolerance,
                      std::isfinite(measured) && measured <= tolerance});
  }
};

inline void write_report(std::ostream& out, const VerificationReport& report) {
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name
        << " measured=" << format_double(c.measured) << " tol=" << format_double(c.tolerance)
        << '\n';
  }
  out << (report.passed() ? "all checks passed" : std::to_string(report.failures()) +
                                                      " check(s) failed")
      << '\n';
}

namespace detail {

inline const std::vector<double>& temperature_grid() {
  static const std::vector<double> grid{0.4, 0.7, 1.0, 1.3, 1.6};
  return grid;
}

/// Five-point central difference of f at x along one coordinate. Returns
/// NaN when a stencil point is non-finite or `same_piece` rejects it.
template <class F, class P>
double central_difference(F&& f, P&& same_piece, std::vector<double> x, std::size_t i,
                          double h) {
  const double x0 = x[i];
  const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
  double v[4];
  for (int k = 0; k < 4; ++k) {
    x[i] = x0 + offsets[k] * h;
    if (!same_piece(x)) return std::numeric_limits<double>::quiet_NaN();
    v[k] = f(x);
    if (!std::isfinite(v[k])) return std::numeric_limits<double>::quiet_NaN();
  }
  return (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
}

inline std::vector<bool> zero_pattern(std::span<const double> a, Temperature t2) {
  const auto p = tempered_probs(a, t2);
  std::vector<bool> z(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) z[c] = p[c] == 0.0;
  return z;
}

inline void verify_gradients(VerificationReport& report, std::uint64_t seed) {
  const std::vector<double> temps_grid{0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.9};
  Rng rng(derive_seed(seed, "verify-gradients"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_t(0, temps_grid.size() - 1);
  const double h = 1e-3;
  double worst_multi = 0.0, worst_binary = 0.0;
  std::size_t convex = 0, quasi = 0, configs = 0;
  while (configs < 200) {
    const TemperaturePair temps(temps_grid[pick_t(rng)], temps_grid[pick_t(rng)]);
    if ((configs % 2 == 0) != temps.convex_by_theory()) continue;
    const std::size_t d = 1 + rng() % 5, C = 2 + rng() % 4;
    Example ex;
    for (std::size_t j = 0; j < d; ++j) ex.x.push_back(static_cast<std::uint32_t>(j), normal(rng));
    ex.label = rng() % C;
    std::vector<double> w(d * C);
    for (double& v : w) v = normal(rng) / std::sqrt(static_cast<double>(d));
    const WeightMatrix W(d, C, w);
    if (!std::isfinite(surrogate_loss(ex, W, temps))) continue;
    ++configs;
    (temps.convex_by_theory() ? convex : quasi)++;

    const auto center = zero_pattern(W.activations(ex.x), temps.t2);
    const auto grad = surrogate_grad(ex, W, temps);
    auto f = [&](const std::vector<double>& v) {
      return surrogate_loss(ex, WeightMatrix(d, C, v), temps);
    };
    auto same = [&](const std::vector<double>& v) {
      return zero_pattern(WeightMatrix(d, C, v).activations(ex.x), temps.t2) == center;
    };
    double num = 0.0, scale = 1e-6;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double fd = central_difference(f, same, w, i, h);
      if (std::isnan(fd)) continue;
      num = std::max(num, std::abs(fd - grad.flat()[i]));
      scale = std::max({scale, std::abs(fd), std::abs(grad.flat()[i])});
    }
    worst_multi = std::max(worst_multi, num / scale);

    // Binary form on the same features, class from the label parity.
    const int c = ex.label % 2 == 0 ? 1 : -1;
    std::vector<double> wb(d);
    for (double& v : wb) v = normal(rng) / std::sqrt(static_cast<double>(d));
    if (!std::isfinite(binary_loss(ex.x, c, wb, temps))) continue;
    const auto gb = binary_grad(ex.x, c, wb, temps);
    auto fb = [&](const std::vector<double>& v) { return binary_loss(ex.x, c, v, temps); };
    auto support = [&](const std::vector<double>& v) {
      return binary_state(dot(ex.x, v), temps.t2).p[c == 1 ? 0 : 1] == 0.0;
    };
    const bool zero0 = support(wb);
    auto same_b = [&](const std::vector<double>& v) { return support(v) == zero0; };
    num = 0.0;
    scale = 1e-6;
    for (std::size_t i = 0; i < d; ++i) {
      const double fd = central_difference(fb, same_b, wb, i, h);
      if (std::isnan(fd)) continue;
      num = std::max(num, std::abs(fd - gb[i]));
      scale = std::max({scale, std::abs(fd), std::abs(gb[i])});
    }
    worst_binary = std::max(worst_binary, num / scale);
  }
  report.add(Suite::Gradients, "surrogate_grad_vs_finite_difference", worst_multi, 1e-5);
  report.add(Suite::Gradients, "binary_grad_vs_finite_difference", worst_binary, 1e-5);
  report.add(Suite::Gradients, "both_regimes_covered", convex > 0 && quasi > 0 ? 0.0 : 1.0, 0.0);
}

/// Plain softmax regression, written without any tempered machinery.
struct ReferenceSoftmax {
  static std::vector<double> probs(std::span<const double> a) {
    const double m = *std::max_element(a.begin(), a.end());
    std::vector<double> p(a.size());
    double z = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) z += (p[c] = std::exp(a[c] - m));
    for (double& v : p) v /= z;
    return p;
  }
  static double loss(std::span<const double> a, std::size_t label) {
    const double m = *std::max_element(a.begin(), a.end());
    double z = 0.0;
    for (double v : a) z += std::exp(v - m);
    return m + std::log(z) - a[label];
  }
};

inline double rel_diff(double x, double ref) {
  return std::abs(x - ref) / std::max(1.0, std::abs(ref));
}

inline void verify_recovery(VerificationReport& report, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "verify-recovery"));
  std::normal_distribution<double> normal(0.0, 1.0);
  const TemperaturePair logistic(1.0, 1.0), t_logistic(1.0, 1.6);
  double loss_err = 0.0, grad_err = 0.0, prob_err = 0.0, tlog_err = 0.0, bin_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng() % 6, C = 2 + rng() % 5;
    Example ex;
    for (std::size_t j = 0; j < d; ++j) ex.x.push_back(static_cast<std::uint32_t>(j), normal(rng));
    ex.label = rng() % C;
    std::vector<double> w(d * C);
    for (double& v : w) v = 2.0 * normal(rng);
    const WeightMatrix W(d, C, w);
    const auto a = W.activations(ex.x);

    const auto ref_p = ReferenceSoftmax::probs(a);
    const auto p = tempered_probs(a, logistic.t2);
    for (std::size_t c = 0; c < C; ++c) prob_err = std::max(prob_err, std::abs(p[c] - ref_p[c]));
    loss_err = std::max(loss_err, rel_diff(surrogate_loss(ex, W, logistic),
                                           ReferenceSoftmax::loss(a, ex.label)));
    const auto g = surrogate_grad(ex, W, logistic);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t c = 0; c < C; ++c) {
        const double ref = ex.x.values[k] * (ref_p[c] - (c == ex.label ? 1.0 : 0.0));
        grad_err = std::max(grad_err, rel_diff(g(k, c), ref));
      }
    }
    const double tp = tempered_probs(a, t_logistic.t2)[ex.label];
    tlog_err = std::max(tlog_err, rel_diff(surrogate_loss(ex, W, t_logistic), -std::log(tp)));

    const int c = trial % 2 == 0 ? 1 : -1;
    const double margin = dot(ex.x, std::span<const double>(w).first(d));
    bin_err = std::max(bin_err, rel_diff(binary_loss(ex.x, c, std::span<const double>(w).first(d), logistic),
                                         std::log1p(std::exp(-c * margin))));
  }
  report.add(Suite::Recovery, "softmax_probabilities", prob_err, 1e-12);
  report.add(Suite::Recovery, "softmax_loss", loss_err, 1e-12);
  report.add(Suite::Recovery, "softmax_gradient", grad_err, 1e-12);
  report.add(Suite::Recovery, "logistic_binary_loss", bin_err, 1e-12);
  report.add(Suite::Recovery, "t_logistic_loss", tlog_err, 1e-12);
}

inline void verify_curvature(VerificationReport& report) {
  const auto& grid = temperature_grid();
  double mismatches = 0.0;
  for (double t1 : grid) {
    for (double t2 : grid) {
      const TemperaturePair temps(t1, t2);
      const bool convex = curvature_report(temps).regime == Regime::Convex;
      if (convex != temps.convex_by_theory()) mismatches += 1.0;
    }
  }
  report.add(Suite::Curvature, "regime_map_mismatches", mismatches, 0.0);

  const TemperaturePair robust(0.6, 1.6);
  const auto points = find_inflection(robust, -20.0, 5.0);
  report.add(Suite::Curvature, "single_inflection_count",
             std::abs(static_cast<double>(points.size()) - 1.0), 0.0);
  double residual = points.empty() ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& p : points) residual = std::max(residual, std::abs(p.residual));
  report.add(Suite::Curvature, "inflection_residual", residual, 1e-6);

  report.add(Suite::Curvature, "logistic_curvature_at_zero",
             std::abs(loss_second_derivative(0.0, TemperaturePair(1.0, 1.0)) - 0.25), 1e-15);

  // Five-point second difference of the loss against the analytic form.
  double fd_err = 0.0;
  const double h = 1e-3;
  const std::vector<double> margins{-6.0, -3.0, -1.5, -0.5, 0.0, 0.7, 2.0, 4.5};
  for (double t1 : grid) {
    for (double t2 : grid) {
      const TemperaturePair temps(t1, t2);
      for (double a : margins) {
        double v[5];
        bool usable = true;
        const bool zero0 = detail::margin_point(a, temps, 1).zero_prob;
        for (int k = -2; k <= 2; ++k) {
          const auto m = detail::margin_point(a + k * h, temps, 1);
          usable = usable && m.zero_prob == zero0 && std::isfinite(m.loss);
          v[k + 2] = m.loss;
        }
        if (!usable) continue;
        const double fd = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
        const double an = loss_second_derivative(a, temps);
        fd_err = std::max(fd_err, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
      }
    }
  }
  report.add(Suite::Curvature, "second_derivative_vs_finite_difference", fd_err, 1e-4);

  double same_t = 0.0, ordering = 0.0;
  for (double t1 : grid) {
    for (double t2 : grid) {
      const TemperaturePair temps(t1, t2);
      if (!temps.convex_by_theory()) continue;
      for (double a = -20.0; a <= 20.0; a += 0.25) {
        const double xi2 = loss_second_derivative(a, temps);
        const double g2 = partition_d2(a, temps.t2);
        if (t1 == t2) same_t = std::max(same_t, std::abs(xi2 - g2));
        ordering = std::max(ordering, g2 - xi2);
      }
    }
  }
  report.add(Suite::Curvature, "equal_temperatures_match_partition_curvature", same_t, 1e-12);
  report.add(Suite::Curvature, "convex_regime_at_least_partition_curvature", ordering, 1e-9);

  double mirror = 0.0;
  for (double t : {0.4, 0.7}) {
    const TemperaturePair temps(t, t);
    const auto pos = find_inflection(temps, -20.0, 20.0, 1);
    const auto neg = find_inflection(temps, -20.0, 20.0, -1);
    if (pos.size() != neg.size() || pos.empty()) {
      mirror = std::numeric_limits<double>::infinity();
      continue;
    }
    for (std::size_t i = 0; i < pos.size(); ++i) {
      mirror = std::max(mirror, std::abs(pos[i].margin + neg[neg.size() - 1 - i].margin));
    }
  }
  report.add(Suite::Curvature, "inflection_mirror_symmetry", mirror, 1e-9);
}

inline void verify_bayes(VerificationReport& report, std::uint64_t seed) {
  const std::vector<TemperaturePair> pairs{{1.0, 1.0}, {1.0, 1.6}, {0.6, 1.6}, {1.3, 1.0}};
  double closed = 0.0, sign_fail = 0.0, at_half = 0.0;
  for (const auto& temps : pairs) {
    for (int k = 1; k <= 19; ++k) {
      const double eta = 0.05 * k;
      const auto chk = bayes_binary_check(eta, temps);
      closed = std::max(closed, std::abs(chk.a_star_numeric - chk.a_star_closed_form));
      if (!chk.sign_consistent) sign_fail += 1.0;
      if (k == 10) at_half = std::max(at_half, std::abs(chk.a_star_numeric));
    }
  }
  report.add(Suite::Bayes, "binary_minimizer_vs_closed_form", closed, 1e-5);
  report.add(Suite::Bayes, "binary_sign_failures", sign_fail, 0.0);
  report.add(Suite::Bayes, "binary_minimizer_at_half", at_half, 1e-6);
  report.add(Suite::Bayes, "logistic_calibration_ln3",
             std::abs(bayes_binary_check(0.75, TemperaturePair(1.0, 1.0)).a_star_numeric -
                      std::log(3.0)),
             1e-5);

  Rng rng(derive_seed(seed, "verify-bayes"));
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  double dev = 0.0, argmax_fail = 0.0;
  const TemperaturePair robust(0.6, 1.6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> p(3 + trial % 3);
    double z = 0.0;
    for (double& v : p) z += (v = unif(rng));
    for (double& v : p) v /= z;
    const auto chk = bayes_multiclass_check(p, robust);
    dev = std::max(dev, chk.max_deviation);
    if (!chk.argmax_preserved) argmax_fail += 1.0;
  }
  const std::vector<double> skewed{0.7, 0.2, 0.1};
  dev = std::max(dev, bayes_multiclass_check(skewed, TemperaturePair(1.0, 1.0)).max_deviation);
  report.add(Suite::Bayes, "multiclass_probabilities_match_target", dev, 1e-4);
  report.add(Suite::Bayes, "multiclass_argmax_failures", argmax_fail, 0.0);
}

}  // namespace detail

inline VerificationReport run_verification(Suite suite, std::uint64_t seed = 0) {
  VerificationReport report;
  switch (suite) {
    case Suite::Curvature: detail::verify_curvature(report); break;
    case Suite::Bayes: detail::verify_bayes(report, seed); break;
    case Suite::Gradients: detail::verify_gradients(report, seed); break;
    case Suite::Recovery: detail::verify_recovery(report, seed); break;
  }
  return report;
}

}  // namespace ttlr
