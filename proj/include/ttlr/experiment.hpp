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
 * @file experiment.hpp
 * @brief Noise-sweep experiments: split, corrupt the training part, pick
 *        lambda by k-fold cross-validation, fit, score on the clean test part.
 *
 * Every random choice is drawn from a seed derived from the ExperimentSpec seed and a
 * name ("data", "split", "noise", "folds", "init") plus the repetition and,
 * for noise, the bit pattern of the noise level. A cell (method, level, rep)
 * therefore reproduces without running the rest of the sweep.
 *
 * CSV schema (one row per cell, rows ordered by noise level, then method,
 * then repetition):
 *
 *   method,noise_kind,noise_level,rep,lambda,accuracy,seconds
 *
 * `method` is the canonical method name (plain_lr, t_lr:<t>, ttlr:<t1>:<t2>),
 * `rep` is 0-based, `lambda` is the selected regularizer, `accuracy` is the
 * clean test accuracy and `seconds` is the wall-clock time of the final fit,
 * left empty unless timing is enabled (so that reruns are byte-identical).
 * The JSON form is an array of objects with the same keys; `seconds` is null
 * when timing is off.
 */

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ttlr/error.hpp"
#include "ttlr/format.hpp"
#include "ttlr/libsvm.hpp"
#include "ttlr/model.hpp"
#include "ttlr/noise.hpp"
#include "ttlr/random.hpp"
#include "ttlr/types.hpp"

namespace ttlr {

inline constexpr double kMinGridLambda = 1e-10;
inline constexpr double kMaxGridLambda = 1e2;

/// `points` log-spaced values from 1e-10 to 1e2 (13 gives one per decade).
inline std::vector<double> default_lambda_grid(std::size_t points = 13) {
  detail::require(points >= 2, "lambda grid needs at least two points");
  std::vector<double> grid(points);
  const double lo = std::log10(kMinGridLambda), hi = std::log10(kMaxGridLambda);
  for (std::size_t i = 0; i < points; ++i) {
    const double e = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = std::pow(10.0, std::round(e * 1e9) / 1e9);
  }
  return grid;
}

inline OptimizerConfig default_experiment_optimizer() {
  OptimizerConfig cfg;
  cfg.progress_tol = 1e-9;
  return cfg;
}

struct ExperimentSpec {
  // Data: LIBSVM files when train_path is set, otherwise two Gaussian blobs
  // centred at +-(separation, 0, ...) with isotropic standard deviation.
  std::string train_path;
  std::string test_path;  ///< empty: split the training file
  std::optional<std::size_t> dim;
  std::size_t synth_per_class = 2000;
  std::size_t synth_dim = 2;
  double synth_separation = 2.0;
  double synth_stddev = 1.0;
  double train_fraction = 0.5;
  bool bias = false;

  std::vector<Method> methods{Method::plain_lr(), Method::ttlr(0.6, 1.6)};
  NoiseKind noise = NoiseKind::None;
  std::vector<double> noise_levels{0.0};
  double sigma = 10.0;

  std::size_t folds = 5;
  std::vector<double> lambdas = default_lambda_grid();
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  double init_stddev = 1e-5;
  OptimizerConfig optimizer = default_experiment_optimizer();
  bool timing = false;

  void validate() const {
    detail::require(!methods.empty(), "experiment: no methods");
    detail::require(!noise_levels.empty(), "experiment: no noise levels");
    detail::require(!lambdas.empty(), "experiment: empty lambda grid");
    for (double l : lambdas) {
      detail::require(l >= kMinGridLambda && l <= kMaxGridLambda,
                      "experiment: lambda grid must lie within [1e-10, 1e2]");
    }
    detail::require(repetitions >= 1, "experiment: repetitions must be >= 1");
    detail::require(folds >= 2, "experiment: folds must be >= 2");
    detail::require(train_fraction > 0.0 && train_fraction < 1.0,
                    "experiment: train_fraction must lie in (0, 1)");
    if (train_path.empty()) {
      detail::require(synth_per_class >= 1, "experiment: synthetic size must be >= 1");
      detail::require(synth_dim >= 1, "experiment: synthetic dim must be >= 1");
      detail::require(synth_separation > 0.0, "experiment: separation must be > 0");
      detail::require(synth_stddev > 0.0, "experiment: stddev must be > 0");
    }
    detail::require(test_path.empty() || !train_path.empty(),
                    "experiment: test file given without a training file");
    for (double level : noise_levels) NoiseSpec{noise, level, sigma, 0}.validate();
    detail::require(init_stddev >= 0.0, "experiment: init_stddev must be >= 0");
    optimizer.validate();
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  for (auto part : split(value, ',')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

inline bool parse_bool(std::string_view v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ContractViolation("config: '" + key + "' expects a boolean");
}

}  // namespace detail

/// Sets one spec field from its config-file key. Returns false for unknown
/// keys.
///
/// Keys: train, test, dim, synthetic_per_class, synthetic_dim,
/// synthetic_separation, synthetic_stddev, train_fraction, bias, methods
/// (comma list), noise (none|outlier|random_flip|margin_flip), noise_levels
/// (comma list), sigma, folds, lambdas (comma list), repetitions, seed,
/// init_stddev, max_iters, grad_tol, progress_tol, timing.
inline bool set_spec_value(ExperimentSpec& spec, std::string_view key_view,
                           std::string_view value) {
  const std::string key(key_view);
  value = trim(value);
  auto number = [&]() {
    const auto v = parse_double(value);
    detail::require(v.has_value(), "config: '" + key + "' expects a number");
    return *v;
  };
  auto count = [&]() {
    const auto v = parse_integer<std::uint64_t>(value);
    detail::require(v.has_value(), "config: '" + key + "' expects a non-negative integer");
    return *v;
  };
  auto numbers = [&]() {
    std::vector<double> out;
    for (const auto& s : detail::split_list(value)) {
      const auto v = parse_double(s);
      detail::require(v.has_value(), "config: '" + key + "' expects numbers");
      out.push_back(*v);
    }
    return out;
  };
  if (key == "train") spec.train_path = std::string(value);
  else if (key == "test") spec.test_path = std::string(value);
  else if (key == "dim") spec.dim = count();
  else if (key == "synthetic_per_class") spec.synth_per_class = count();
  else if (key == "synthetic_dim") spec.synth_dim = count();
  else if (key == "synthetic_separation") spec.synth_separation = number();
  else if (key == "synthetic_stddev") spec.synth_stddev = number();
  else if (key == "train_fraction") spec.train_fraction = number();
  else if (key == "bias") spec.bias = detail::parse_bool(value, key);
  else if (key == "methods") {
    spec.methods.clear();
    for (const auto& m : detail::split_list(value)) spec.methods.push_back(Method::parse(m));
  } else if (key == "noise") spec.noise = parse_noise_kind(value);
  else if (key == "noise_levels") spec.noise_levels = numbers();
  else if (key == "sigma") spec.sigma = number();
  else if (key == "folds") spec.folds = count();
  else if (key == "lambdas") spec.lambdas = numbers();
  else if (key == "repetitions") spec.repetitions = count();
  else if (key == "seed") spec.seed = count();
  else if (key == "init_stddev") spec.init_stddev = number();
  else if (key == "max_iters") spec.optimizer.max_iters = count();
  else if (key == "grad_tol") spec.optimizer.grad_tol = number();
  else if (key == "progress_tol") spec.optimizer.progress_tol = number();
  else if (key == "timing") spec.timing = detail::parse_bool(value, key);
  else return false;
  return true;
}

/// Reads `key = value` lines onto `spec`; '#' starts a comment.
inline void read_experiment_config(std::istream& in, ExperimentSpec& spec) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(lineno, 1, "expected key = value");
    }
    const auto key = trim(view.substr(0, eq));
    try {
      if (!set_spec_value(spec, key, view.substr(eq + 1))) {
        throw ParseError(lineno, 1, "unknown key '" + std::string(key) + "'");
      }
    } catch (const ContractViolation& e) {
      throw ParseError(lineno, eq + 2, e.what());
    }
  }
}

struct ResultRow {
  std::string method;
  NoiseKind noise_kind = NoiseKind::None;
  double noise_level = 0.0;
  std::size_t rep = 0;
  double lambda = 0.0;
  double accuracy = 0.0;
  std::optional<double> seconds;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Clean train/test pair for one repetition.
struct SplitData {
  Dataset train;
  Dataset test;
};

namespace detail {

inline Dataset load_libsvm_file(const std::string& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open '" + path + "'");
  try {
    return parse_libsvm(in, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.message());
  }
}

inline std::uint64_t level_bits(double level) { return std::bit_cast<std::uint64_t>(level); }

}  // namespace detail

/// Loads or generates the data shared by all repetitions. `test` is empty
/// unless a separate test file is configured.
inline SplitData load_experiment_data(const ExperimentSpec& spec) {
  SplitData out;
  if (spec.train_path.empty()) {
    std::vector<std::vector<double>> means(2, std::vector<double>(spec.synth_dim, 0.0));
    means[0][0] = spec.synth_separation;
    means[1][0] = -spec.synth_separation;
    out.train = synth_gaussians(spec.synth_per_class, means, spec.synth_stddev,
                                derive_seed(spec.seed, "data"));
  } else {
    LibsvmOptions options;
    options.dim = spec.dim;
    out.train = detail::load_libsvm_file(spec.train_path, options);
    if (!spec.test_path.empty()) {
      options.dim = out.train.dim;
      options.label_values = out.train.label_values;
      out.test = detail::load_libsvm_file(spec.test_path, options);
    }
  }
  if (spec.bias) {
    out.train = with_bias_feature(out.train);
    if (!out.test.empty()) out.test = with_bias_feature(out.test);
  }
  return out;
}

/// The clean train/test split used by repetition `rep`.
inline SplitData split_for_rep(const ExperimentSpec& spec, const SplitData& data,
                               std::size_t rep) {
  if (!data.test.empty()) return data;
  const std::size_t n = data.train.size();
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * n));
  detail::require(n_train >= 1 && n_train < n, "experiment: split leaves an empty side");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "split", rep));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + n_train);
  std::vector<std::size_t> test(perm.begin() + n_train, perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.train.subset(train), data.train.subset(test)};
}

inline Dataset noisy_training_set(const ExperimentSpec& spec, const Dataset& train,
                                  double level, std::size_t rep) {
  return apply_noise(train, NoiseSpec{spec.noise, level, spec.sigma,
                                      derive_seed(spec.seed, "noise", rep,
                                                  detail::level_bits(level))});
}

inline FitConfig experiment_fit_config(const ExperimentSpec& spec, std::size_t rep) {
  FitConfig cfg;
  cfg.seed = derive_seed(spec.seed, "init", rep);
  cfg.init_stddev = spec.init_stddev;
  cfg.optimizer = spec.optimizer;
  return cfg;
}

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> mean_accuracy;  ///< per grid point
};

/// k-fold cross-validation on `train`; highest mean validation accuracy
/// wins, ties go to the larger lambda.
inline LambdaSelection select_lambda(const ExperimentSpec& spec, const Method& method,
                                     const Dataset& train, std::size_t rep) {
  const std::size_t n = train.size();
  detail::require(n >= spec.folds, "experiment: fewer training examples than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "folds", rep));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Dataset> fit_parts, held_parts;
  for (std::size_t k = 0; k < spec.folds; ++k) {
    std::vector<std::size_t> fit_rows, held_rows;
    for (std::size_t i = 0; i < n; ++i) {
      (i % spec.folds == k ? held_rows : fit_rows).push_back(perm[i]);
    }
    std::sort(fit_rows.begin(), fit_rows.end());
    std::sort(held_rows.begin(), held_rows.end());
    fit_parts.push_back(train.subset(fit_rows));
    held_parts.push_back(train.subset(held_rows));
  }

  LambdaSelection sel;
  const FitConfig cfg = experiment_fit_config(spec, rep);
  double best = -1.0;
  for (double lambda : spec.lambdas) {
    double total = 0.0;
    for (std::size_t k = 0; k < spec.folds; ++k) {
      const auto model = fit(fit_parts[k], method.temps(), lambda, cfg);
      total += accuracy(model, held_parts[k]);
    }
    const double mean = total / static_cast<double>(spec.folds);
    sel.mean_accuracy.push_back(mean);
    if (mean > best || (mean == best && lambda > sel.lambda)) {
      best = mean;
      sel.lambda = lambda;
    }
  }
  return sel;
}

/// Selects lambda on the noisy training set, refits on all of it and scores
/// the clean test set.
inline ResultRow run_cell(const ExperimentSpec& spec, const Method& method, double level,
                          std::size_t rep, const SplitData& split, const Dataset& noisy_train) {
  ResultRow row;
  row.method = method.name();
  row.noise_kind = spec.noise;
  row.noise_level = level;
  row.rep = rep;
  row.lambda = select_lambda(spec, method, noisy_train, rep).lambda;
  const auto start = std::chrono::steady_clock::now();
  const auto model = fit(noisy_train, method.temps(), row.lambda, experiment_fit_config(spec, rep));
  const auto stop = std::chrono::steady_clock::now();
  if (spec.timing) row.seconds = std::chrono::duration<double>(stop - start).count();
  row.accuracy = accuracy(model, split.test);
  return row;
}

/// Runs one cell from scratch.
inline ResultRow run_cell(const ExperimentSpec& spec, const Method& method, double level,
                          std::size_t rep) {
  spec.validate();
  const auto split = split_for_rep(spec, load_experiment_data(spec), rep);
  return run_cell(spec, method, level, rep, split, noisy_training_set(spec, split.train, level, rep));
}

inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto data = load_experiment_data(spec);
  const std::size_t M = spec.methods.size(), L = spec.noise_levels.size(), R = spec.repetitions;
  std::vector<ResultRow> rows(L * M * R);
  for (std::size_t rep = 0; rep < R; ++rep) {
    const auto split = split_for_rep(spec, data, rep);
    for (std::size_t l = 0; l < L; ++l) {
      const double level = spec.noise_levels[l];
      const auto noisy = noisy_training_set(spec, split.train, level, rep);
      for (std::size_t m = 0; m < M; ++m) {
        rows[(l * M + m) * R + rep] = run_cell(spec, spec.methods[m], level, rep, split, noisy);
      }
    }
  }
  return rows;
}

inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,noise_kind,noise_level,rep,lambda,accuracy,seconds\n";
  for (const auto& r : rows) {
    out << r.method << ',' << to_string(r.noise_kind) << ',' << format_double(r.noise_level)
        << ',' << r.rep << ',' << format_double(r.lambda) << ',' << format_double(r.accuracy)
        << ',';
    if (r.seconds) out << format_double(*r.seconds);
    out << '\n';
  }
}

inline nlohmann::ordered_json results_to_json(const std::vector<ResultRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["noise_kind"] = to_string(r.noise_kind);
    j["noise_level"] = r.noise_level;
    j["rep"] = r.rep;
    j["lambda"] = r.lambda;
    j["accuracy"] = r.accuracy;
    j["seconds"] = r.seconds ? nlohmann::ordered_json(*r.seconds) : nlohmann::ordered_json();
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<ResultRow> results_from_json(const nlohmann::ordered_json& arr) {
  std::vector<ResultRow> rows;
  for (const auto& j : arr) {
    ResultRow r;
    r.method = j.at("method").get<std::string>();
    r.noise_kind = parse_noise_kind(j.at("noise_kind").get<std::string>());
    r.noise_level = j.at("noise_level").get<double>();
    r.rep = j.at("rep").get<std::size_t>();
    r.lambda = j.at("lambda").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    if (!j.at("seconds").is_null()) r.seconds = j.at("seconds").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_results_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << results_to_json(rows).dump(2) << '\n';
}

struct SummaryCell {
  std::string method;
  NoiseKind noise_kind = NoiseKind::None;
  double noise_level = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation; 0 for a single row
};

/// Mean and standard deviation of test accuracy per (method, noise level),
/// in first-appearance order.
inline std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryCell> cells;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    std::size_t i = 0;
    while (i < cells.size() && !(cells[i].method == r.method && cells[i].noise_kind == r.noise_kind &&
                                 cells[i].noise_level == r.noise_level)) {
      ++i;
    }
    if (i == cells.size()) {
      cells.push_back({r.method, r.noise_kind, r.noise_level});
      values.emplace_back();
    }
    values[i].push_back(r.accuracy);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& v = values[i];
    cells[i].count = v.size();
    cells[i].mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - cells[i].mean) * (x - cells[i].mean);
    cells[i].stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return cells;
}

/// Accuracies as percentages, `mean ± std`.
inline void write_summary(std::ostream& out, const std::vector<SummaryCell>& cells) {
  std::ostringstream s;
  s << std::left << std::setw(20) << "method" << std::setw(13) << "noise" << std::setw(8)
    << "level" << std::setw(6) << "reps" << "accuracy (%)\n";
  for (const auto& c : cells) {
    std::ostringstream acc;
    acc << std::fixed << std::setprecision(2) << 100.0 * c.mean << " ± " << 100.0 * c.stddev;
    s << std::left << std::setw(20) << c.method << std::setw(13) << to_string(c.noise_kind)
      << std::setw(8) << format_double(c.noise_level) << std::setw(6) << c.count << acc.str()
      << '\n';
  }
  out << s.str();
}

}  // namespace ttlr
