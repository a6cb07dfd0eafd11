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

// ttlr: train, predict, sweep, verify, noise.
//
// Exit status: 0 on success, 1 when a verification check fails, 2 on bad
// input (usage, contract or parse errors).

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ttlr/ttlr.hpp"

namespace {

using namespace ttlr;

constexpr int kExitFailedChecks = 1;
constexpr int kExitBadInput = 2;

/// Output sink: the named file, or stdout when the path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ContractViolation("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool is_stdout() const { return !file_; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Dataset read_dataset(const std::string& path, const LibsvmOptions& options) {
  if (path == "-") return parse_libsvm(std::cin, options);
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open '" + path + "'");
  try {
    return parse_libsvm(in, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.message());
  }
}

void check_format(const std::string& format) {
  if (format != "csv" && format != "json") {
    throw ContractViolation("--format must be csv or json");
  }
}

struct TrainArgs {
  std::string data, out;
  std::optional<std::size_t> dim;
  double t1 = 1.0, t2 = 1.0, lambda = 1e-4;
  std::uint64_t seed = 0;
  std::size_t max_iters = 500;
  double grad_tol = 1e-6;
  bool bias = false;
};

int run_train(const TrainArgs& args) {
  LibsvmOptions options;
  options.dim = args.dim;
  Dataset data = read_dataset(args.data, options);
  if (args.bias) data = with_bias_feature(data);
  FitConfig cfg;
  cfg.seed = args.seed;
  cfg.optimizer.max_iters = args.max_iters;
  cfg.optimizer.grad_tol = args.grad_tol;
  auto model = fit(data, TemperaturePair(args.t1, args.t2), args.lambda, cfg);
  model.set_bias(args.bias);
  Output out(args.out);
  save_model(out.stream(), model);
  const auto& trace = model.trace();
  std::cerr << "examples " << data.size() << ", classes " << data.num_classes << ", dim "
            << data.dim << "\n"
            << "iterations " << trace.iterations() << " (" << to_string(trace.reason)
            << "), objective " << format_double(trace.records.back().value)
            << ", train accuracy " << format_double(accuracy(model, data)) << "\n";
  for (const auto& w : trace.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

struct PredictArgs {
  std::string model, data, out, format = "csv";
};

int run_predict(const PredictArgs& args) {
  check_format(args.format);
  std::ifstream min(args.model);
  if (!min) throw ContractViolation("cannot open '" + args.model + "'");
  const auto model = load_model(min);
  LibsvmOptions options;
  options.dim = model.dim() - (model.bias() ? 1 : 0);
  if (!model.label_values().empty()) options.label_values = model.label_values();
  Dataset data = read_dataset(args.data, options);
  detail::require(data.num_classes <= model.num_classes(),
                  "data has more classes than the model");
  if (model.bias()) data = with_bias_feature(data);

  auto label_text = [&](std::size_t c) {
    return model.label_values().empty() ? format_double(static_cast<double>(c + 1))
                                        : format_double(model.label_values()[c]);
  };
  Output out(args.out);
  auto& os = out.stream();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  if (args.format == "csv") os << "index,label,predicted\n";
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& ex = data.examples[i];
    const std::size_t pred = predict(model, ex.x);
    correct += pred == ex.label;
    if (args.format == "csv") {
      os << i << ',' << label_text(ex.label) << ',' << label_text(pred) << '\n';
    } else {
      rows.push_back({{"index", i}, {"label", label_text(ex.label)},
                      {"predicted", label_text(pred)}});
    }
  }
  if (args.format == "json") os << rows.dump(2) << '\n';
  std::cerr << "accuracy " << format_double(static_cast<double>(correct) /
                                            static_cast<double>(data.size()))
            << " on " << data.size() << " examples\n";
  return 0;
}

struct SweepArgs {
  std::string config, out, format = "csv";
  std::vector<std::pair<std::string, std::string>> overrides;
};

int run_sweep(const SweepArgs& args) {
  check_format(args.format);
  ExperimentSpec spec;
  if (!args.config.empty()) {
    std::ifstream in(args.config);
    if (!in) throw ContractViolation("cannot open '" + args.config + "'");
    try {
      read_experiment_config(in, spec);
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.column(), args.config + ": " + e.message());
    }
  }
  for (const auto& [key, value] : args.overrides) set_spec_value(spec, key, value);
  const auto rows = run_experiment(spec);
  Output out(args.out);
  if (args.format == "csv") {
    write_results_csv(out.stream(), rows);
  } else {
    write_results_json(out.stream(), rows);
  }
  write_summary(out.is_stdout() ? std::cerr : std::cout, summarize(rows));
  return 0;
}

struct VerifyArgs {
  std::string suite = "all", out, format = "csv", curve_out, bayes_out;
  std::uint64_t seed = 0;
  double t1 = 0.6, t2 = 1.6;
};

int run_verify(const VerifyArgs& args) {
  check_format(args.format);
  std::vector<Suite> suites;
  if (args.suite == "all") {
    suites = {Suite::Curvature, Suite::Bayes, Suite::Gradients, Suite::Recovery};
  } else {
    suites = {parse_suite(args.suite)};
  }
  VerificationReport report;
  for (Suite s : suites) {
    auto part = run_verification(s, args.seed);
    report.checks.insert(report.checks.end(), part.checks.begin(), part.checks.end());
  }
  Output out(args.out);
  if (args.format == "csv") {
    write_report(out.stream(), report);
  } else {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
      arr.push_back({{"suite", c.suite}, {"name", c.name}, {"measured", c.measured},
                     {"tolerance", c.tolerance}, {"passed", c.passed}});
    }
    out.stream() << arr.dump(2) << '\n';
  }

  const TemperaturePair temps(args.t1, args.t2);
  if (!args.curve_out.empty()) {
    Output curve(args.curve_out);
    const auto r = curvature_report(temps);
    write_curvature_csv(curve.stream(), r);
    std::cerr << "regime " << to_string(r.regime) << ", inflection points:";
    for (const auto& p : r.inflection_points) std::cerr << ' ' << format_double(p.margin);
    std::cerr << '\n';
  }
  if (!args.bayes_out.empty()) {
    Output bayes(args.bayes_out);
    std::vector<BayesCheck> checks;
    for (int k = 1; k <= 19; ++k) checks.push_back(bayes_binary_check(0.05 * k, temps));
    write_bayes_csv(bayes.stream(), temps, checks);
  }
  return report.passed() ? 0 : kExitFailedChecks;
}

struct NoiseArgs {
  std::string data, out, kind = "outlier";
  std::optional<std::size_t> dim;
  std::size_t synthetic = 0;
  double level = 0.1, sigma = 10.0;
  std::uint64_t seed = 0;
};

int run_noise(const NoiseArgs& args) {
  detail::require(args.data.empty() != (args.synthetic == 0),
                  "noise: give exactly one of --data or --synthetic");
  Dataset data;
  if (args.synthetic > 0) {
    data = synth_gaussians(args.synthetic, {{2.0, 0.0}, {-2.0, 0.0}}, 1.0,
                           derive_seed(args.seed, "data"));
  } else {
    LibsvmOptions options;
    options.dim = args.dim;
    data = read_dataset(args.data, options);
  }
  const NoiseSpec spec{parse_noise_kind(args.kind), args.level, args.sigma,
                       derive_seed(args.seed, "noise")};
  const auto noisy = apply_noise(data, spec);
  Output out(args.out);
  write_libsvm(out.stream(), noisy);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tempered two-temperature logistic regression"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "fit a model on a LIBSVM file");
  train_cmd->add_option("data", train.data, "training file (LIBSVM, '-' for stdin)")->required();
  train_cmd->add_option("--out", train.out, "model file (default stdout)");
  train_cmd->add_option("--dim", train.dim, "feature dimension override");
  train_cmd->add_option("--t1", train.t1, "loss temperature")->capture_default_str();
  train_cmd->add_option("--t2", train.t2, "probability temperature")->capture_default_str();
  train_cmd->add_option("--lambda", train.lambda, "L2 regularizer")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "initialization seed")->capture_default_str();
  train_cmd->add_option("--max-iters", train.max_iters, "L-BFGS iterations")->capture_default_str();
  train_cmd->add_option("--grad-tol", train.grad_tol, "gradient sup-norm tolerance")
      ->capture_default_str();
  train_cmd->add_flag("--bias", train.bias, "append a constant feature");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "label a LIBSVM file with a saved model");
  pred_cmd->add_option("--model", pred.model, "model file")->required();
  pred_cmd->add_option("data", pred.data, "input file (LIBSVM, '-' for stdin)")->required();
  pred_cmd->add_option("--out", pred.out, "output file (default stdout)");
  pred_cmd->add_option("--format", pred.format, "csv or json")->capture_default_str();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a noise sweep with cross-validated lambda");
  sweep_cmd->add_option("--config", sweep.config, "key = value experiment file");
  sweep_cmd->add_option("--out", sweep.out, "result rows (default stdout)");
  sweep_cmd->add_option("--format", sweep.format, "csv or json")->capture_default_str();
  struct Override {
    const char* flag;
    const char* key;
    const char* help;
  };
  static const Override overrides[] = {
      {"--data", "train", "training file (LIBSVM); synthetic Gaussians when absent"},
      {"--test", "test", "test file; a seeded split of --data when absent"},
      {"--dim", "dim", "feature dimension override"},
      {"--methods", "methods", "comma list of plain_lr, t_lr:<t>, ttlr:<t1>:<t2>"},
      {"--noise", "noise", "none, outlier, random_flip or margin_flip"},
      {"--levels", "noise_levels", "comma list of noise ratios / probabilities"},
      {"--sigma", "sigma", "outlier noise standard deviation"},
      {"--folds", "folds", "cross-validation folds"},
      {"--lambdas", "lambdas", "comma list of lambda values in [1e-10, 1e2]"},
      {"--reps", "repetitions", "repetitions"},
      {"--seed", "seed", "base seed"},
      {"--train-fraction", "train_fraction", "train share of a seeded split"},
      {"--synthetic-per-class", "synthetic_per_class", "synthetic points per class"},
      {"--max-iters", "max_iters", "L-BFGS iterations per fit"},
  };
  std::vector<std::string> override_values(std::size(overrides));
  std::vector<CLI::Option*> override_opts;
  for (std::size_t i = 0; i < std::size(overrides); ++i) {
    override_opts.push_back(
        sweep_cmd->add_option(overrides[i].flag, override_values[i], overrides[i].help));
  }
  bool sweep_bias = false, sweep_timing = false;
  auto* bias_opt = sweep_cmd->add_flag("--bias", sweep_bias, "append a constant feature");
  auto* timing_opt = sweep_cmd->add_flag("--timing", sweep_timing,
                                         "record fit seconds (output no longer reproducible)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "run self-check batteries");
  verify_cmd->add_option("--suite", verify.suite, "curvature, bayes, gradients, recovery or all")
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "seed for randomized checks")->capture_default_str();
  verify_cmd->add_option("--out", verify.out, "report file (default stdout)");
  verify_cmd->add_option("--format", verify.format, "csv (text lines) or json")
      ->capture_default_str();
  verify_cmd->add_option("--t1", verify.t1, "temperatures for --curve-out / --bayes-out")
      ->capture_default_str();
  verify_cmd->add_option("--t2", verify.t2)->capture_default_str();
  verify_cmd->add_option("--curve-out", verify.curve_out, "write the loss curvature profile CSV");
  verify_cmd->add_option("--bayes-out", verify.bayes_out, "write the binary Bayes check CSV");

  NoiseArgs noise;
  auto* noise_cmd = app.add_subcommand("noise", "write a corrupted copy of a dataset");
  noise_cmd->add_option("--data", noise.data, "input file (LIBSVM, '-' for stdin)");
  noise_cmd->add_option("--synthetic", noise.synthetic, "generate N points per class instead");
  noise_cmd->add_option("--dim", noise.dim, "feature dimension override");
  noise_cmd->add_option("--kind", noise.kind, "none, outlier, random_flip or margin_flip")
      ->capture_default_str();
  noise_cmd->add_option("--level", noise.level, "ratio or flip probability")->capture_default_str();
  noise_cmd->add_option("--sigma", noise.sigma, "outlier standard deviation")->capture_default_str();
  noise_cmd->add_option("--seed", noise.seed, "seed")->capture_default_str();
  noise_cmd->add_option("--out", noise.out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return run_train(train);
    if (*pred_cmd) return run_predict(pred);
    if (*sweep_cmd) {
      for (std::size_t i = 0; i < std::size(overrides); ++i) {
        if (*override_opts[i]) sweep.overrides.emplace_back(overrides[i].key, override_values[i]);
      }
      if (*bias_opt) sweep.overrides.emplace_back("bias", sweep_bias ? "1" : "0");
      if (*timing_opt) sweep.overrides.emplace_back("timing", sweep_timing ? "1" : "0");
      return run_sweep(sweep);
    }
    if (*verify_cmd) return run_verify(verify);
    if (*noise_cmd) return run_noise(noise);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitBadInput;
}
