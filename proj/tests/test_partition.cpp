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
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ttlr/partition.hpp"

using ttlr::Temperature;

namespace {

std::vector<double> binary_acts(double a) { return {0.5 * a, -0.5 * a}; }

}  // namespace

TEST(LogPartition, Examples) {
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_NEAR(ttlr::log_partition(zero, Temperature(1.0)).G, std::log(2.0), 1e-15);
  EXPECT_NEAR(ttlr::log_partition(zero, Temperature(1.5)).G, 2.0 * (std::sqrt(2.0) - 1.0), 1e-13);
  const std::vector<double> fives{5, 5, 5}, zeros{0, 0, 0};
  EXPECT_NEAR(ttlr::log_partition(fives, Temperature(1.6)).G,
              5.0 + ttlr::log_partition(zeros, Temperature(1.6)).G, 1e-13);
}

TEST(LogPartition, RejectsBadActivations) {
  const std::vector<double> one{1.0}, nan{0.0, std::nan("")}, inf{0.0, INFINITY};
  EXPECT_THROW(ttlr::log_partition(one, Temperature(1.2)), ttlr::ContractViolation);
  EXPECT_THROW(ttlr::log_partition(nan, Temperature(1.2)), ttlr::ContractViolation);
  EXPECT_THROW(ttlr::log_partition(inf, Temperature(0.7)), ttlr::ContractViolation);
}

TEST(LogPartition, MatchesBisectionOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (double t : {0.3, 0.5, 0.8, 1.0, 1.2, 1.6, 1.9}) {
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<double> a(2 + trial % 9);
      for (auto& v : a) v = u(rng);
      const auto r = ttlr::log_partition(a, Temperature(t));
      EXPECT_LE(r.residual, ttlr::kNormalizationTolerance);
      EXPECT_NEAR(r.G, static_cast<double>(oracle::log_partition(a, t)), 1e-9 * std::max(1.0, std::abs(r.G)));
    }
  }
}

TEST(LogPartition, ShiftIdentity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-20.0, 20.0), shift(-10.0, 10.0);
  for (double t : {0.5, 1.0, 1.6}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> a(2 + trial % 6);
      for (auto& v : a) v = u(rng);
      const double b = shift(rng);
      auto shifted = a;
      for (auto& v : shifted) v += b;
      EXPECT_LE(std::abs(ttlr::log_partition(shifted, Temperature(t)).G -
                         (ttlr::log_partition(a, Temperature(t)).G + b)),
                1e-9);
    }
  }
}

TEST(TemperedProbs, Examples) {
  const std::vector<double> zero{0.0, 0.0};
  for (double t : {0.4, 1.0, 1.7}) {
    const auto p = ttlr::tempered_probs(zero, Temperature(t));
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);
  }
  const std::vector<double> far{400.0, -400.0};
  const auto sat = ttlr::tempered_probs(far, Temperature(1.0));
  EXPECT_EQ(sat[0], 1.0);
  EXPECT_EQ(sat[1], 0.0);
  const std::vector<double> three{1.0, 0.0, -1.0};
  const auto p = ttlr::tempered_probs(three, Temperature(1.0));
  const auto ref = oracle::softmax(three);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(p[c], ref[c], 1e-15);
  EXPECT_NEAR(p[0], 0.6652, 1e-4);
  EXPECT_NEAR(p[1], 0.2447, 1e-4);
  EXPECT_NEAR(p[2], 0.0900, 1e-4);
}

TEST(TemperedProbs, NormalizedWithExactZerosAndHeavyTails) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (double t : {0.5, 0.8, 1.0, 1.2, 1.6, 1.9}) {
    bool saw_zero = false;
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> a(2 + trial % 9);
      for (auto& v : a) v = u(rng);
      const auto p = ttlr::tempered_probs(a, Temperature(t));
      double s = 0.0;
      for (double v : p) {
        s += v;
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        if (t > 1.0) {
          EXPECT_GT(v, 0.0);
        }
        if (v == 0.0) saw_zero = true;
        EXPECT_TRUE(v == 0.0 || v >= std::numeric_limits<double>::min());
      }
      EXPECT_LE(std::abs(s - 1.0), 1e-10);
    }
    if (t == 0.5) {
      EXPECT_TRUE(saw_zero);
    }
  }
}

TEST(TemperedProbs, SoftmaxRecovery) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(2 + trial % 8);
    for (auto& v : a) v = n(rng);
    const auto p = ttlr::tempered_probs(a, Temperature(1.0));
    const auto ref = oracle::softmax(a);
    for (std::size_t c = 0; c < a.size(); ++c) EXPECT_NEAR(p[c], ref[c], 1e-12);
  }
}

TEST(Escort, Examples) {
  const std::vector<double> p{0.1, 0.6, 0.3};
  const auto same = ttlr::escort(p, Temperature(1.0));
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(same[c], p[c], 1e-15);
  const std::vector<double> skew{0.8, 0.2};
  const auto sq = ttlr::escort(skew, Temperature(1.99));
  EXPECT_GT(sq[0], 0.93);
  const std::vector<double> half{0.5, 0.5};
  for (double t : {0.3, 1.8}) EXPECT_NEAR(ttlr::escort(half, Temperature(t))[0], 0.5, 1e-15);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(ttlr::escort(zero, Temperature(1.2)), ttlr::ContractViolation);
}

TEST(Escort, SquaredRenormalizationNearTwo) {
  // t = 2 is outside the admissible range; t -> 2 approaches [16/17, 1/17].
  const std::vector<double> skew{0.8, 0.2};
  const auto q = ttlr::escort(skew, Temperature(2.0 - 1e-12));
  EXPECT_NEAR(q[0], 16.0 / 17.0, 1e-10);
  EXPECT_NEAR(q[1], 1.0 / 17.0, 1e-10);
}

TEST(Escort, IsGradientOfLogPartition) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> n(0.0, 2.0);
  for (double t : {0.6, 1.0, 1.5}) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> a(2 + trial % 5);
      for (auto& v : a) v = n(rng);
      const auto p = ttlr::tempered_probs(a, Temperature(t));
      if (std::any_of(p.begin(), p.end(), [](double v) { return v < 1e-3; })) continue;
      const auto q = ttlr::escort(p, Temperature(t));
      for (std::size_t c = 0; c < a.size(); ++c) {
        const double fd = oracle::fd1(
            [&](const std::vector<double>& v) { return ttlr::log_partition(v, Temperature(t)).G; },
            a, c, 1e-3);
        EXPECT_NEAR(fd, q[c], 1e-8);
      }
    }
  }
}

TEST(BinaryPartition, DerivativeExamples) {
  for (double t : {0.4, 1.0, 1.7}) EXPECT_EQ(ttlr::partition_d1(0.0, Temperature(t)), 0.0);
  EXPECT_NEAR(ttlr::partition_d1(800.0, Temperature(1.0)), 0.5, 1e-15);
  EXPECT_NEAR(ttlr::partition_d1(1.0, Temperature(1.0)), 0.5 * std::tanh(0.5), 1e-15);
  EXPECT_NEAR(ttlr::partition_d2(0.0, Temperature(1.0)), 0.25, 1e-15);
  // Margin 10 puts all mass on +1 under t2 = 0.5.
  const auto p = ttlr::tempered_probs(binary_acts(10.0), Temperature(0.5));
  ASSERT_EQ(p[1], 0.0);
  EXPECT_EQ(ttlr::partition_d2(10.0, Temperature(0.5)), 0.0);
}

TEST(BinaryPartition, DerivativesMatchFiniteDifferences) {
  for (double t : {0.3, 0.6, 0.9, 1.0, 1.3, 1.6, 1.9}) {
    const Temperature T(t);
    auto G = [&](double a) { return ttlr::log_partition(binary_acts(a), T).G; };
    auto d1 = [&](double a) { return ttlr::partition_d1(a, T); };
    for (double a = -8.0; a <= 8.0; a += 0.37) {
      // Skip stencils that straddle the clamp boundary (exact zeros on one side).
      auto zeros = [&](double x) { return ttlr::tempered_probs(binary_acts(x), T)[1] == 0.0 ||
                                          ttlr::tempered_probs(binary_acts(x), T)[0] == 0.0; };
      const double h = 1e-3;
      if (zeros(a - 2 * h) != zeros(a + 2 * h)) continue;
      const double g1 = ttlr::partition_d1(a, T), g2 = ttlr::partition_d2(a, T);
      EXPECT_LE(std::abs(oracle::fd1(G, a, h) - g1), 1e-5 * std::max(std::abs(g1), 1e-3))
          << "t=" << t << " a=" << a;
      EXPECT_LE(std::abs(oracle::fd1(d1, a, h) - g2), 1e-5 * std::max(std::abs(g2), 1e-3))
          << "t=" << t << " a=" << a;
      EXPECT_GE(g2, 0.0);
      EXPECT_LE(std::abs(g1), 0.5);
    }
  }
}
