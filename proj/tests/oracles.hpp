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

// Reference implementations used only by the tests. None of them calls into
// the library: they are the naive textbook formulas, evaluated in long double
// where that helps, so that agreement is evidence rather than tautology.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using Real = long double;

inline Real log_t(Real x, Real t) {
  if (t == 1.0L) return std::log(x);
  return (std::pow(x, 1.0L - t) - 1.0L) / (1.0L - t);
}

inline Real exp_t(Real x, Real t) {
  if (t == 1.0L) return std::exp(x);
  const Real base = 1.0L + (1.0L - t) * x;
  if (base <= 0.0L) return t < 1.0L ? 0.0L : INFINITY;
  return std::pow(base, 1.0L / (1.0L - t));
}

/// G with sum_c exp_t(a_c - G) = 1, by plain bisection.
inline Real log_partition(const std::vector<double>& a, Real t) {
  const Real m = *std::max_element(a.begin(), a.end());
  auto sum = [&](Real G) {
    Real s = 0.0L;
    for (double v : a) s += exp_t(v - G, t);
    return s;
  };
  Real lo = m, hi = m + 1.0L;
  while (sum(hi) > 1.0L) hi = m + 2.0L * (hi - m);
  for (int i = 0; i < 300; ++i) {
    const Real mid = 0.5L * (lo + hi);
    (sum(mid) > 1.0L ? lo : hi) = mid;
  }
  return 0.5L * (lo + hi);
}

inline std::vector<double> tempered_probs(const std::vector<double>& a, Real t) {
  const Real G = log_partition(a, t);
  std::vector<double> p(a.size());
  for (std::size_t c = 0; c < a.size(); ++c) p[c] = static_cast<double>(exp_t(a[c] - G, t));
  return p;
}

/// -log_{t1} exp_{t2}(a_label - G_{t2}(a)).
inline double ttlr_loss(const std::vector<double>& a, std::size_t label, Real t1, Real t2) {
  const Real G = log_partition(a, t2);
  const Real p = exp_t(a[label] - G, t2);
  if (p == 0.0L) return t1 < 1.0L ? static_cast<double>(1.0L / (1.0L - t1)) : INFINITY;
  return static_cast<double>(-log_t(p, t1));
}

inline std::vector<double> softmax(const std::vector<double>& a) {
  const double m = *std::max_element(a.begin(), a.end());
  std::vector<double> p(a.size());
  double z = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) z += (p[c] = std::exp(a[c] - m));
  for (double& v : p) v /= z;
  return p;
}

inline double softmax_nll(const std::vector<double>& a, std::size_t label) {
  const double m = *std::max_element(a.begin(), a.end());
  double z = 0.0;
  for (double v : a) z += std::exp(v - m);
  return m + std::log(z) - a[label];
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Five-point central first derivative along coordinate i.
inline double fd1(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  auto at = [&](double d) {
    x[i] = x0 + d;
    return f(x);
  };
  return (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
}

inline double fd1(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

inline double fd2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) /
         (12 * h * h);
}

/// Dense multiclass logistic regression: rows of x, 0-based labels, weights
/// row-major d x C.
struct SoftmaxRegression {
  std::vector<std::vector<double>> x;
  std::vector<std::size_t> y;
  std::size_t C = 2;
  double lambda = 0.0;

  double objective(const std::vector<double>& w, std::vector<double>* grad) const {
    const std::size_t d = x.front().size();
    if (grad) grad->assign(w.size(), 0.0);
    double total = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      std::vector<double> a(C, 0.0);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t c = 0; c < C; ++c) a[c] += x[n][j] * w[j * C + c];
      total += softmax_nll(a, y[n]);
      if (grad) {
        const auto p = softmax(a);
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t c = 0; c < C; ++c)
            (*grad)[j * C + c] += x[n][j] * (p[c] - (c == y[n] ? 1.0 : 0.0)) / x.size();
      }
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      sq += w[i] * w[i];
      if (grad) (*grad)[i] += lambda * w[i];
    }
    return total / x.size() + 0.5 * lambda * sq;
  }

  /// Fixed-step gradient descent; fine for small, strongly convex problems.
  std::vector<double> fit(std::vector<double> w, double step, int iters) const {
    std::vector<double> g;
    for (int it = 0; it < iters; ++it) {
      objective(w, &g);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
    }
    return w;
  }
};

}  // namespace oracle
