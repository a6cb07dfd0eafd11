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
 * @file noise.hpp
 * @brief Synthetic Gaussian blobs and the three training-set corruptions:
 *        outlier features, random label flips, large-margin label flips.
 *
 * Every injector is a pure function of (data, parameters, seed). None of them
 * changes N, dim or the label table.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ttlr/error.hpp"
#include "ttlr/model.hpp"
#include "ttlr/random.hpp"
#include "ttlr/types.hpp"

namespace ttlr {

/// n_per_class isotropic Normal(mean_k, stddev^2 I) points per class, class
/// blocks in order. Two-class sets get the label table {+1, -1}; larger ones
/// {1, ..., C}.
inline Dataset synth_gaussians(std::size_t n_per_class,
                               const std::vector<std::vector<double>>& means,
                               double stddev, std::uint64_t seed) {
  detail::require(n_per_class > 0, "synth_gaussians: n_per_class must be > 0");
  detail::require(means.size() >= 2, "synth_gaussians: need at least two classes");
  detail::require(stddev > 0.0 && std::isfinite(stddev),
                  "synth_gaussians: stddev must be > 0");
  const std::size_t dim = means.front().size();
  detail::require(dim > 0, "synth_gaussians: means must be non-empty");
  for (std::size_t i = 0; i < means.size(); ++i) {
    detail::require(means[i].size() == dim, "synth_gaussians: ragged means");
    for (std::size_t k = 0; k < i; ++k) {
      detail::require(means[i] != means[k], "synth_gaussians: means must be distinct");
    }
  }

  Dataset data;
  data.dim = dim;
  data.num_classes = means.size();
  if (means.size() == 2) {
    data.label_values = {1.0, -1.0};
  } else {
    for (std::size_t c = 0; c < means.size(); ++c) {
      data.label_values.push_back(static_cast<double>(c + 1));
    }
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> x(dim);
  data.examples.reserve(n_per_class * means.size());
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t n = 0; n < n_per_class; ++n) {
      for (std::size_t j = 0; j < dim; ++j) x[j] = means[c][j] + normal(rng);
      data.examples.push_back({SparseVector::dense(x), c});
    }
  }
  return data;
}

namespace detail {

/// floor(ratio * n), robust to decimal ratios like 0.29 * 100.
inline std::size_t noisy_count(double ratio, std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(n) * (1.0 + 1e-12)));
}

inline void require_binary(const Dataset& data, const char* who) {
  require(data.num_classes == 2, std::string(who) + ": binary dataset required");
}

}  // namespace detail

/// Adds Normal(0, sigma^2) to every coordinate (densifying the row) of
/// floor(ratio * N) uniformly chosen examples. Labels untouched.
inline Dataset inject_outlier_noise(const Dataset& data, double sigma, double ratio,
                                    std::uint64_t seed) {
  detail::require(sigma > 0.0 && std::isfinite(sigma), "outlier noise: sigma must be > 0");
  detail::require(ratio >= 0.0 && ratio <= 0.5, "outlier noise: ratio must lie in [0, 0.5]");
  Dataset out = data;
  Rng rng(seed);
  const auto rows = sample_without_replacement(data.size(), detail::noisy_count(ratio, data.size()), rng);
  std::normal_distribution<double> normal(0.0, sigma);
  std::vector<double> dense(data.dim);
  for (std::size_t r : rows) {
    std::fill(dense.begin(), dense.end(), 0.0);
    const auto& x = data.examples[r].x;
    for (std::size_t k = 0; k < x.nnz(); ++k) dense[x.indices[k]] = x.values[k];
    for (double& v : dense) v += normal(rng);
    out.examples[r].x = SparseVector::dense(dense);
  }
  return out;
}

/// Flips each label of a binary dataset independently with probability prob.
inline Dataset inject_random_flip(const Dataset& data, double prob, std::uint64_t seed) {
  detail::require_binary(data, "random flip");
  detail::require(prob >= 0.0 && prob <= 1.0, "random flip: prob must lie in [0, 1]");
  Dataset out = data;
  Rng rng(seed);
  std::bernoulli_distribution flip(prob);
  for (auto& e : out.examples) {
    if (flip(rng)) e.label = 1 - e.label;
  }
  return out;
}

/// Per-example margins under a plain logistic-regression fit and the
/// resulting large-margin sampling weights.
struct LargeMarginScores {
  std::vector<double> margins;  ///< c_n <x_n, w>, c = +1 for class 1
  std::vector<double> weights;  ///< exp(-10 u_n / u_min), in [e^-10, 1]
};

inline LargeMarginScores large_margin_scores(const Dataset& data, double lr_lambda = 1e-4,
                                             const FitConfig& config = {}) {
  detail::require_binary(data, "large-margin scores");
  const auto model = fit(data, Method::plain_lr().temps(), lr_lambda, config);
  const auto& W = model.weights();
  std::vector<double> w(data.dim);
  for (std::size_t j = 0; j < data.dim; ++j) w[j] = W(j, 0) - W(j, 1);

  LargeMarginScores s;
  s.margins.reserve(data.size());
  for (const auto& e : data.examples) {
    double a = 0.0;
    for (std::size_t k = 0; k < e.x.nnz(); ++k) a += e.x.values[k] * w[e.x.indices[k]];
    s.margins.push_back(e.label == 0 ? a : -a);
  }
  const double u_max = *std::max_element(s.margins.begin(), s.margins.end());
  double u_min = 0.0;
  for (double m : s.margins) u_min = std::min(u_min, m - u_max);
  s.weights.resize(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    // All margins equal: nothing to prefer, sample uniformly.
    s.weights[n] = u_min == 0.0 ? 1.0 : std::exp(-10.0 * (s.margins[n] - u_max) / u_min);
  }
  return s;
}

/// Large-margin label noise: flips exactly floor(ratio * N) labels drawn
/// without replacement with probability proportional to `scores.weights`
/// (exponential-key sampling).
inline Dataset inject_margin_flip(const Dataset& data, double ratio, std::uint64_t seed,
                                  const LargeMarginScores& scores) {
  detail::require_binary(data, "margin flip");
  detail::require(ratio >= 0.0 && ratio <= 0.5, "margin flip: ratio must lie in [0, 0.5]");
  detail::require(scores.weights.size() == data.size(), "margin flip: score size mismatch");
  Dataset out = data;
  const std::size_t k = detail::noisy_count(ratio, data.size());
  if (k == 0) return out;
  Rng rng(seed);
  // key = u^(1/s), compared in log space.
  std::vector<double> key(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) key[n] = std::log(open_unit(rng)) / scores.weights[n];
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return key[a] > key[b] || (key[a] == key[b] && a < b);
                    });
  for (std::size_t i = 0; i < k; ++i) {
    auto& e = out.examples[order[i]];
    e.label = 1 - e.label;
  }
  return out;
}

inline Dataset inject_margin_flip(const Dataset& data, double ratio, std::uint64_t seed) {
  detail::require_binary(data, "margin flip");
  if (detail::noisy_count(ratio, data.size()) == 0) {
    detail::require(ratio >= 0.0 && ratio <= 0.5, "margin flip: ratio must lie in [0, 0.5]");
    return data;
  }
  return inject_margin_flip(data, ratio, seed, large_margin_scores(data));
}

enum class NoiseKind { None, Outlier, RandomFlip, MarginFlip };

inline const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Outlier: return "outlier";
    case NoiseKind::RandomFlip: return "random_flip";
    case NoiseKind::MarginFlip: return "margin_flip";
  }
  return "unknown";
}

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::None;
  if (s == "outlier") return NoiseKind::Outlier;
  if (s == "random_flip" || s == "flip") return NoiseKind::RandomFlip;
  if (s == "margin_flip" || s == "margin") return NoiseKind::MarginFlip;
  throw ContractViolation("unknown noise kind '" + std::string(s) +
                          "' (expected none, outlier, random_flip or margin_flip)");
}

/// One corruption: `level` is the ratio (outlier, margin_flip) or the flip
/// probability (random_flip).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double level = 0.0;
  double sigma = 10.0;
  std::uint64_t seed = 0;

  void validate() const {
    switch (kind) {
      case NoiseKind::None: break;
      case NoiseKind::Outlier:
        detail::require(sigma > 0.0, "noise: sigma must be > 0");
        [[fallthrough]];
      case NoiseKind::MarginFlip:
        detail::require(level >= 0.0 && level <= 0.5, "noise: ratio must lie in [0, 0.5]");
        break;
      case NoiseKind::RandomFlip:
        detail::require(level >= 0.0 && level <= 1.0, "noise: probability must lie in [0, 1]");
        break;
    }
  }
};

inline Dataset apply_noise(const Dataset& data, const NoiseSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case NoiseKind::None: return data;
    case NoiseKind::Outlier: return inject_outlier_noise(data, spec.sigma, spec.level, spec.seed);
    case NoiseKind::RandomFlip: return inject_random_flip(data, spec.level, spec.seed);
    case NoiseKind::MarginFlip: return inject_margin_flip(data, spec.level, spec.seed);
  }
  return data;
}

}  // namespace ttlr
