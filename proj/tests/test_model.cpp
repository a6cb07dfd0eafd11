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

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ttlr/model.hpp"
#include "ttlr/noise.hpp"

using ttlr::Dataset;
using ttlr::Method;
using ttlr::SparseVector;
using ttlr::TemperaturePair;
using ttlr::TTLRModel;
using ttlr::WeightMatrix;

namespace {

Dataset separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset d;
  d.dim = 2;
  d.num_classes = 2;
  while (d.size() < n) {
    const double x0 = u(rng), x1 = u(rng);
    const double s = x0 + 0.5 * x1;
    if (std::abs(s) < 0.2) continue;  // margin gap
    d.examples.push_back({SparseVector::dense(std::vector<double>{x0, x1}), s > 0 ? 0u : 1u});
  }
  return d;
}

Dataset three_blobs(std::size_t n, std::uint64_t seed) {
  return ttlr::synth_gaussians(n, {{2, 0}, {-1, 1.7}, {-1, -1.7}}, 1.0, seed);
}

}  // namespace

TEST(Fit, SeparatesSeparableData) {
  const auto data = separable(200, 1);
  const auto model = ttlr::fit(data, {1.0, 1.0}, 1e-4);
  EXPECT_EQ(ttlr::accuracy(model, data), 1.0);
  EXPECT_TRUE(model.fitted());
}

TEST(Fit, RejectsBadInput) {
  Dataset single = separable(10, 2);
  single.num_classes = 1;
  for (auto& e : single.examples) e.label = 0;
  EXPECT_THROW(ttlr::fit(single, {1.0, 1.0}, 1e-4), ttlr::ContractViolation);
  Dataset empty;
  empty.dim = 2;
  empty.num_classes = 2;
  EXPECT_THROW(ttlr::fit(empty, {1.0, 1.0}, 1e-4), ttlr::ContractViolation);
  EXPECT_THROW(ttlr::fit(separable(10, 2), {1.0, 1.0}, -1.0), ttlr::ContractViolation);
  ttlr::FitConfig cfg;
  cfg.init_stddev = -1.0;
  EXPECT_THROW(ttlr::fit(separable(10, 2), {1.0, 1.0}, 0.1, cfg), ttlr::ContractViolation);
}

TEST(Fit, DeterministicGivenSeed) {
  const auto data = three_blobs(50, 3);
  ttlr::FitConfig cfg;
  cfg.seed = 99;
  const auto a = ttlr::fit(data, {0.6, 1.6}, 1e-3, cfg);
  const auto b = ttlr::fit(data, {0.6, 1.6}, 1e-3, cfg);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(a.trace().records, b.trace().records);
}

TEST(Fit, DegenerateDataFitsPriorAndWarns) {
  Dataset d;
  d.dim = 3;
  d.num_classes = 2;
  for (int i = 0; i < 6; ++i) d.examples.push_back({SparseVector{}, static_cast<std::size_t>(i % 2)});
  const auto model = ttlr::fit(d, {1.0, 1.0}, 0.1);
  ASSERT_FALSE(model.trace().warnings.empty());
  EXPECT_NE(model.trace().warnings.front().find("degenerate"), std::string::npos);
}

TEST(Fit, DuplicatedDataGivesSameWeights) {
  const auto data = three_blobs(40, 4);
  Dataset doubled = data;
  for (const auto& e : data.examples) doubled.examples.push_back(e);
  const auto a = ttlr::fit(data, {0.8, 1.2}, 1e-2);
  const auto b = ttlr::fit(doubled, {0.8, 1.2}, 1e-2);
  for (std::size_t i = 0; i < a.weights().flat().size(); ++i) {
    EXPECT_NEAR(a.weights().flat()[i], b.weights().flat()[i], 1e-5);
  }
}

TEST(Fit, PlainLogisticMatchesReferenceSoftmaxRegression) {
  const auto data = three_blobs(15, 5);
  const double lambda = 0.1;
  oracle::SoftmaxRegression ref;
  ref.C = 3;
  ref.lambda = lambda;
  for (const auto& e : data.examples) {
    std::vector<double> x(data.dim, 0.0);
    for (std::size_t k = 0; k < e.x.nnz(); ++k) x[e.x.indices[k]] = e.x.values[k];
    ref.x.push_back(x);
    ref.y.push_back(e.label);
  }
  ttlr::FitConfig cfg;
  cfg.optimizer.grad_tol = 1e-10;
  const auto recipe = ttlr::make_baseline(Method::plain_lr(), lambda, cfg);
  const auto model = recipe.fit(data);
  const auto w_ref = ref.fit(std::vector<double>(data.dim * 3, 0.0), 0.5, 20000);
  const auto mine = std::vector<double>(model.weights().flat().begin(), model.weights().flat().end());
  EXPECT_NEAR(ref.objective(mine, nullptr), ref.objective(w_ref, nullptr), 1e-6);
}

TEST(Predict, TieBreakAndSignRule) {
  const TTLRModel zero(WeightMatrix(2, 3), {1.0, 1.0}, 0.0);
  EXPECT_EQ(ttlr::predict(zero, SparseVector::dense(std::vector<double>{1.0, -2.0})), 0u);
  // Two-column form of a single weight vector w: [w/2, -w/2].
  const std::vector<double> w{0.3, -0.8};
  const TTLRModel binary(WeightMatrix(2, 2, {w[0] / 2, -w[0] / 2, w[1] / 2, -w[1] / 2}),
                         {0.6, 1.6}, 0.0);
  EXPECT_EQ(ttlr::predict(binary, SparseVector::dense(std::vector<double>{1.0, 0.0})), 0u);
  EXPECT_EQ(ttlr::predict(binary, SparseVector::dense(std::vector<double>{0.0, 1.0})), 1u);
}

TEST(Predict, ContractChecks) {
  const TTLRModel unfitted;
  EXPECT_THROW(ttlr::predict(unfitted, SparseVector{}), ttlr::ContractViolation);
  const TTLRModel m(WeightMatrix(2, 2), {1.0, 1.0}, 0.0);
  EXPECT_THROW(ttlr::predict(m, SparseVector::dense(std::vector<double>{1, 2, 3})),
               ttlr::ContractViolation);
  EXPECT_THROW(ttlr::predict_proba(unfitted, SparseVector{}), ttlr::ContractViolation);
}

TEST(Predict, AgreesWithArgmaxOfProbabilities) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double t2 : {0.5, 1.0, 1.6}) {
    std::vector<double> w(3 * 4);
    for (auto& v : w) v = n(rng);
    const TTLRModel m(WeightMatrix(3, 4, w), {0.8, t2}, 0.0);
    for (int i = 0; i < 1000; ++i) {
      const auto x = SparseVector::dense(std::vector<double>{n(rng), n(rng), n(rng)});
      const auto p = ttlr::predict_proba(m, x);
      const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      EXPECT_EQ(ttlr::predict(m, x), best);
    }
  }
}

TEST(Predict, InvariantToCommonActivationShift) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> w(3 * 3);
  for (auto& v : w) v = n(rng);
  WeightMatrix shifted(3, 3, w);
  for (std::size_t c = 0; c < 3; ++c) shifted(2, c) += 4.2;  // feature 2 is constant 1
  const TTLRModel a(WeightMatrix(3, 3, w), {1.0, 1.3}, 0.0), b(shifted, {1.0, 1.3}, 0.0);
  for (int i = 0; i < 500; ++i) {
    const auto x = SparseVector::dense(std::vector<double>{n(rng), n(rng), 1.0});
    EXPECT_EQ(ttlr::predict(a, x), ttlr::predict(b, x));
  }
}

TEST(PredictProba, Examples) {
  const TTLRModel zero(WeightMatrix(1, 3), {1.0, 1.0}, 0.0);
  for (double p : ttlr::predict_proba(zero, SparseVector::dense(std::vector<double>{2.0}))) {
    EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  }
  const std::vector<double> a{2.0, 0.5, -6.0};
  const auto x = SparseVector::dense(std::vector<double>{1.0});
  const TTLRModel soft(WeightMatrix(1, 3, a), {1.0, 1.0}, 0.0);
  const auto ref = oracle::softmax(a);
  const auto p = ttlr::predict_proba(soft, x);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(p[c], ref[c], 1e-15);
  const TTLRModel heavy(WeightMatrix(1, 3, a), {1.0, 1.6}, 0.0);
  const auto q = ttlr::predict_proba(heavy, x);
  EXPECT_GT(q[2], 0.0);
  EXPECT_GT(q[2], ref[2]);
}

TEST(Method, BaselinesAndParsing) {
  EXPECT_EQ(Method::plain_lr().temps(), TemperaturePair(1.0, 1.0));
  EXPECT_EQ(Method::t_lr(1.6).temps(), TemperaturePair(1.0, 1.6));
  EXPECT_EQ(Method::ttlr(0.6, 1.6).temps(), TemperaturePair(0.6, 1.6));
  EXPECT_THROW(Method::t_lr(2.5), ttlr::ContractViolation);
  for (const auto& m : {Method::plain_lr(), Method::t_lr(1.6), Method::ttlr(0.6, 1.6)}) {
    EXPECT_EQ(Method::parse(m.name()), m);
    EXPECT_EQ(m.name().find(','), std::string::npos);
  }
  EXPECT_EQ(Method::parse("ttlr:0.6:1.6").name(), "ttlr:0.6:1.6");
  EXPECT_THROW(Method::parse("svm"), ttlr::ContractViolation);
  EXPECT_THROW(Method::parse("ttlr:0.6"), ttlr::ContractViolation);
  EXPECT_THROW(Method::parse("t_lr:abc"), ttlr::ContractViolation);
  const auto recipe = ttlr::make_baseline(Method::t_lr(1.6), 1e-3);
  EXPECT_EQ(recipe.method.temps(), TemperaturePair(1.0, 1.6));
  EXPECT_EQ(recipe.lambda, 1e-3);
}

TEST(ModelFile, RoundTripIsExact) {
  const auto data = three_blobs(20, 8);
  auto model = ttlr::fit(data, {0.6, 1.6}, 1e-3);
  model.set_bias(true);
  std::stringstream s;
  ttlr::save_model(s, model);
  const auto back = ttlr::load_model(s);
  EXPECT_EQ(back.weights(), model.weights());
  EXPECT_EQ(back.temps(), model.temps());
  EXPECT_EQ(back.lambda(), model.lambda());
  EXPECT_EQ(back.label_values(), model.label_values());
  EXPECT_TRUE(back.bias());
  EXPECT_TRUE(back.fitted());
}

TEST(ModelFile, MalformedInputIsParseError) {
  const char* bad[] = {
      "",
      "not-a-model 1\n",
      "ttlr-model 2\n",
      "ttlr-model 1\ndim 2\nclasses 2\nt1 0.6\nt2 1.6\nlambda 0\nbias 0\nweights\n1 2\n",
      "ttlr-model 1\ndim 1\nclasses 2\nt1 3\nt2 1.6\nlambda 0\nbias 0\nweights\n1 2\n",
      "ttlr-model 1\ndim 1\nclasses 2\nt1 0.6\nt2 1.6\nlambda 0\nbias 0\nweights\n1 x\n",
  };
  for (const char* text : bad) {
    std::istringstream in(text);
    EXPECT_THROW(ttlr::load_model(in), ttlr::ParseError) << text;
  }
}
