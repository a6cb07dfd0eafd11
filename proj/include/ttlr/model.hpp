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
 * @file model.hpp
 * @brief TTLR classifier: fit / predict / predict_proba, baselines, and the
 *        text model format.
 *
 * Model file (version 1), one record per line:
 *
 *     ttlr-model 1
 *     dim <d>
 *     classes <C>
 *     t1 <t1>
 *     t2 <t2>
 *     lambda <lambda>
 *     bias <0|1>
 *     labels <label of class 1> ... <label of class C>
 *     weights
 *     <W(0,0)> ... <W(0,C-1)>
 *     ...                                  (d rows, row-major)
 *
 * Doubles use the shortest representation that round-trips exactly. The
 * `bias` and `labels` records are optional on input.
 */

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ttlr/error.hpp"
#include "ttlr/format.hpp"
#include "ttlr/loss.hpp"
#include "ttlr/optimizer.hpp"
#include "ttlr/partition.hpp"
#include "ttlr/types.hpp"

namespace ttlr {

struct FitConfig {
  std::uint64_t seed = 0;
  /// Initial weights are Normal(0, init_stddev^2); 1e-5 gives variance 1e-10.
  double init_stddev = 1e-5;
  OptimizerConfig optimizer;
};

class TTLRModel {
 public:
  /// Unfitted placeholder; every predict-family call on it throws.
  TTLRModel() : temps_(1.0, 1.0) {}

  TTLRModel(WeightMatrix W, TemperaturePair temps, double lambda)
      : W_(std::move(W)), temps_(temps), lambda_(lambda), fitted_(true) {
    detail::require(W_.num_classes() >= 2, "model needs at least two classes");
    detail::require(W_.all_finite(), "model weights must be finite");
  }

  const WeightMatrix& weights() const noexcept { return W_; }
  const TemperaturePair& temps() const noexcept { return temps_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t num_classes() const noexcept { return W_.num_classes(); }
  std::size_t dim() const noexcept { return W_.dim(); }
  bool fitted() const noexcept { return fitted_; }

  const OptimizationTrace& trace() const noexcept { return trace_; }
  void set_trace(OptimizationTrace trace) { trace_ = std::move(trace); }

  /// Original labels of the classes, when known (from the training file).
  const std::vector<double>& label_values() const noexcept { return labels_; }
  void set_label_values(std::vector<double> labels) {
    detail::require(labels.empty() || labels.size() == num_classes(),
                    "label table size does not match class count");
    labels_ = std::move(labels);
  }

  /// True when a constant feature was appended to every input during training.
  bool bias() const noexcept { return bias_; }
  void set_bias(bool bias) noexcept { bias_ = bias; }

 private:
  WeightMatrix W_;
  TemperaturePair temps_;
  double lambda_ = 0.0;
  bool fitted_ = false;
  bool bias_ = false;
  std::vector<double> labels_;
  OptimizationTrace trace_;
};

namespace detail {

inline bool has_any_feature(const Dataset& data) {
  for (const auto& e : data.examples) {
    for (double v : e.x.values) {
      if (v != 0.0) return true;
    }
  }
  return false;
}

inline void require_fitted_input(const TTLRModel& model, const SparseVector& x) {
  require(model.fitted(), "model is not fitted");
  require(x.indices.empty() || x.indices.back() < model.dim(),
          "input dimension exceeds model dimension");
}

}  // namespace detail

/// Minimizes the L2-regularized mean TTLR loss with L-BFGS from a seeded
/// Normal(0, init_stddev^2) start. Deterministic in (data, temps, lambda,
/// config).
inline TTLRModel fit(const Dataset& data, const TemperaturePair& temps,
                     double lambda, const FitConfig& config = {}) {
  detail::require(!data.empty(), "fit: empty dataset");
  detail::require(data.num_classes >= 2, "fit: at least two classes required");
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "fit: lambda must be >= 0");
  detail::require(config.init_stddev >= 0.0, "fit: init_stddev must be >= 0");
  data.validate();

  WeightMatrix W(data.dim, data.num_classes);
  if (config.init_stddev > 0.0) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, config.init_stddev);
    for (double& v : W.flat()) v = normal(rng);
  }
  auto objective = [&](std::span<const double> w, std::span<double> g) {
    return detail::objective_flat(data, w, temps, lambda, g);
  };
  auto flat = W.flat();
  auto result = lbfgs_minimize(objective, std::vector<double>(flat.begin(), flat.end()),
                               config.optimizer);
  if (!detail::has_any_feature(data)) {
    result.trace.warnings.emplace_back(
        "degenerate data: no non-zero features, fitted the prior-only model");
  }
  TTLRModel model(WeightMatrix(data.dim, data.num_classes, std::move(result.x)),
                  temps, lambda);
  model.set_trace(std::move(result.trace));
  model.set_label_values(data.label_values);
  return model;
}

/// 0-based class with the largest activation; ties go to the lowest index.
inline std::size_t predict(const TTLRModel& model, const SparseVector& x) {
  detail::require_fitted_input(model, x);
  const auto a = model.weights().activations(x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < a.size(); ++c) {
    if (a[c] > a[best]) best = c;
  }
  return best;
}

inline std::vector<double> predict_proba(const TTLRModel& model,
                                         const SparseVector& x) {
  detail::require_fitted_input(model, x);
  const auto a = model.weights().activations(x);
  return tempered_probs(a, model.temps().t2);
}

/// Fraction of examples whose predicted class equals the label.
inline double accuracy(const TTLRModel& model, const Dataset& data) {
  detail::require(!data.empty(), "accuracy: empty dataset");
  std::size_t hits = 0;
  for (const auto& e : data.examples) hits += predict(model, e.x) == e.label;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

/// A training method: plain logistic regression, t-logistic regression, or
/// the general two-temperature loss. All are temperature settings of one
/// loss.
class Method {
 public:
  enum class Kind { PlainLR, TLR, TTLR };

  static Method plain_lr() { return Method(Kind::PlainLR, 1.0, 1.0); }
  static Method t_lr(double t) { return Method(Kind::TLR, 1.0, t); }
  static Method ttlr(double t1, double t2) { return Method(Kind::TTLR, t1, t2); }

  /// Accepts `plain_lr`, `t_lr:<t>` and `ttlr:<t1>:<t2>`.
  static Method parse(std::string_view text) {
    const auto parts = split(trim(text), ':');
    auto number = [&](std::size_t i) {
      const auto v = parse_double(parts[i]);
      detail::require(v.has_value(), "bad temperature in method '" +
                                         std::string(text) + "'");
      return *v;
    };
    if (parts[0] == "plain_lr" && parts.size() == 1) return plain_lr();
    if (parts[0] == "t_lr" && parts.size() == 2) return t_lr(number(1));
    if (parts[0] == "ttlr" && parts.size() == 3) return ttlr(number(1), number(2));
    throw ContractViolation("unknown method '" + std::string(text) +
                            "' (expected plain_lr, t_lr:<t> or ttlr:<t1>:<t2>)");
  }

  Kind kind() const noexcept { return kind_; }
  const TemperaturePair& temps() const noexcept { return temps_; }

  /// Canonical text form, the inverse of parse(); contains no commas.
  std::string name() const {
    switch (kind_) {
      case Kind::PlainLR: return "plain_lr";
      case Kind::TLR: return "t_lr:" + format_double(temps_.t2.value());
      case Kind::TTLR:
        return "ttlr:" + format_double(temps_.t1.value()) + ":" +
               format_double(temps_.t2.value());
    }
    return "unknown";
  }

  friend bool operator==(const Method&, const Method&) = default;

 private:
  Method(Kind kind, double t1, double t2) : kind_(kind), temps_(t1, t2) {}

  Kind kind_;
  TemperaturePair temps_;
};

/// Everything needed to fit one method at one regularization strength.
struct FitRecipe {
  Method method;
  double lambda;
  FitConfig config;

  TTLRModel fit(const Dataset& data) const {
    return ttlr::fit(data, method.temps(), lambda, config);
  }
};

inline FitRecipe make_baseline(const Method& method, double lambda,
                               const FitConfig& config = {}) {
  detail::require(lambda >= 0.0, "make_baseline: lambda must be >= 0");
  return {method, lambda, config};
}

inline void save_model(std::ostream& out, const TTLRModel& model) {
  detail::require(model.fitted(), "save_model: model is not fitted");
  const auto& W = model.weights();
  out << "ttlr-model 1\n"
      << "dim " << W.dim() << '\n'
      << "classes " << W.num_classes() << '\n'
      << "t1 " << format_double(model.temps().t1.value()) << '\n'
      << "t2 " << format_double(model.temps().t2.value()) << '\n'
      << "lambda " << format_double(model.lambda()) << '\n'
      << "bias " << (model.bias() ? 1 : 0) << '\n';
  if (!model.label_values().empty()) {
    out << "labels";
    for (double v : model.label_values()) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "weights\n";
  for (std::size_t j = 0; j < W.dim(); ++j) {
    for (std::size_t c = 0; c < W.num_classes(); ++c) {
      if (c > 0) out << ' ';
      out << format_double(W(j, c));
    }
    out << '\n';
  }
}

inline TTLRModel load_model(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (!std::getline(in, line)) {
      throw ParseError(line_no + 1, 0, "unexpected end of model file");
    }
    ++line_no;
    return trim(line);
  };
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError(line_no, 0, what);
  };
  if (next_line() != "ttlr-model 1") throw fail("expected header 'ttlr-model 1'");

  std::size_t dim = 0, classes = 0;
  double t1 = 0.0, t2 = 0.0, lambda = 0.0;
  bool bias = false;
  std::vector<double> labels;
  unsigned seen = 0;
  while (true) {
    std::istringstream fields{std::string(next_line())};
    std::string key;
    fields >> key;
    if (key == "weights") break;
    std::string rest;
    std::getline(fields, rest);
    const auto value = trim(rest);
    if (key == "dim" || key == "classes") {
      const auto v = parse_integer<std::size_t>(value);
      if (!v) throw fail("bad integer for '" + key + "'");
      (key == "dim" ? dim : classes) = *v;
      seen |= key == "dim" ? 1u : 2u;
    } else if (key == "t1" || key == "t2" || key == "lambda") {
      const auto v = parse_double(value);
      if (!v) throw fail("bad number for '" + key + "'");
      (key == "t1" ? t1 : key == "t2" ? t2 : lambda) = *v;
      seen |= key == "t1" ? 4u : key == "t2" ? 8u : 16u;
    } else if (key == "bias") {
      bias = value == "1";
      if (value != "0" && value != "1") throw fail("bias must be 0 or 1");
    } else if (key == "labels") {
      for (auto tok : split(value, ' ')) {
        if (tok.empty()) continue;
        const auto v = parse_double(tok);
        if (!v) throw fail("bad label value");
        labels.push_back(*v);
      }
    } else {
      throw fail("unknown record '" + key + "'");
    }
  }
  if (seen != 31u) throw fail("missing one of dim/classes/t1/t2/lambda");

  std::vector<double> w;
  w.reserve(dim * classes);
  for (std::size_t j = 0; j < dim; ++j) {
    std::size_t count = 0;
    for (auto tok : split(next_line(), ' ')) {
      if (tok.empty()) continue;
      const auto v = parse_double(tok);
      if (!v) throw fail("bad weight value");
      w.push_back(*v);
      ++count;
    }
    if (count != classes) throw fail("weight row has the wrong number of columns");
  }
  try {
    detail::require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
    TTLRModel model(WeightMatrix(dim, classes, std::move(w)), TemperaturePair(t1, t2),
                    lambda);
    model.set_bias(bias);
    model.set_label_values(std::move(labels));
    return model;
  } catch (const ContractViolation& e) {
    throw fail(std::string("invalid model: ") + e.what());
  }
}

}  // namespace ttlr
