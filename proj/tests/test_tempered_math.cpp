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
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ttlr/tempered_math.hpp"

using ttlr::Temperature;

TEST(Temperature, RejectsOutsideOpenInterval) {
  EXPECT_THROW(Temperature(0.0), ttlr::ContractViolation);
  EXPECT_THROW(Temperature(2.0), ttlr::ContractViolation);
  EXPECT_THROW(Temperature(-0.5), ttlr::ContractViolation);
  EXPECT_THROW(Temperature(std::numeric_limits<double>::quiet_NaN()), ttlr::ContractViolation);
  EXPECT_NO_THROW(Temperature(1e-9));
  EXPECT_NO_THROW(Temperature(1.999999));
}

TEST(LogT, ValuesFromDefinition) {
  for (double t : {0.3, 0.6, 1.0, 1.4, 1.9}) EXPECT_EQ(ttlr::log_t(1.0, Temperature(t)), 0.0);
  EXPECT_NEAR(ttlr::log_t(4.0, Temperature(0.5)), 2.0, 1e-15);
  EXPECT_NEAR(ttlr::log_t(std::numbers::e, Temperature(1.0)), 1.0, 1e-15);
  EXPECT_NEAR(ttlr::log_t(std::numbers::e, Temperature(1.0 + 1e-9)), 1.0, 1e-8);
  EXPECT_DOUBLE_EQ(ttlr::log_t(0.0, Temperature(0.6)), -2.5);
}

TEST(LogT, DomainErrors) {
  EXPECT_THROW(ttlr::log_t(0.0, Temperature(1.0)), std::domain_error);
  EXPECT_THROW(ttlr::log_t(0.0, Temperature(1.5)), std::domain_error);
  EXPECT_THROW(ttlr::log_t(-1.0, Temperature(0.5)), std::domain_error);
}

TEST(ExpT, ValuesFromDefinition) {
  for (double t : {0.3, 0.6, 1.0, 1.4, 1.9}) EXPECT_EQ(ttlr::exp_t(0.0, Temperature(t)), 1.0);
  EXPECT_NEAR(ttlr::exp_t(-2.0, Temperature(1.5)), 0.25, 1e-15);
  EXPECT_EQ(ttlr::exp_t(-3.0, Temperature(0.5)), 0.0);
  EXPECT_EQ(ttlr::exp_t(3.0, Temperature(1.5)), std::numeric_limits<double>::infinity());
}

TEST(TemperedKernels, AgreeWithNaiveFormula) {
  for (int k = 1; k <= 19; ++k) {
    const double t = 0.1 * k;
    for (double x : {1e-4, 0.01, 0.3, 1.0, 2.5, 40.0, 1e3}) {
      const double ref = static_cast<double>(oracle::log_t(x, t));
      EXPECT_NEAR(ttlr::log_t(x, Temperature(t)), ref, 1e-12 * std::max(1.0, std::abs(ref)))
          << "t=" << t << " x=" << x;
    }
    for (double x : {-5.0, -1.0, -0.2, 0.0, 0.4, 1.0, 3.0}) {
      const double ref = static_cast<double>(oracle::exp_t(x, t));
      if (!std::isfinite(ref)) continue;
      EXPECT_NEAR(ttlr::exp_t(x, Temperature(t)), ref, 1e-12 * std::max(1.0, ref))
          << "t=" << t << " x=" << x;
    }
  }
}

TEST(TemperedKernels, InversePair) {
  for (double t = 0.2; t < 1.85; t += 0.1) {
    const Temperature T(t);
    for (double e = -6.0; e <= 6.0; e += 0.25) {
      const double x = std::pow(10.0, e);
      EXPECT_LE(std::abs(ttlr::exp_t(ttlr::log_t(x, T), T) - x), 1e-9 * x) << t << " " << x;
    }
    if (t < 1.0) {
      EXPECT_EQ(ttlr::exp_t(ttlr::log_t(0.0, T), T), 0.0);
    }
  }
}

TEST(TemperedKernels, ContinuousAcrossOne) {
  // log_t(x) = ln x + k (ln x)^2 / 2 + O(k^2) with k = 1 - t; any switch of
  // formula near t = 1 would show up as a jump against this expansion.
  for (double x : {0.01, 0.5, 2.0, 100.0}) {
    const double L = std::log(x);
    for (double k : {1e-15, 1e-12, 1e-9, 1.01e-6, 0.99e-6, 1e-5, 1.01e-3, 0.99e-3}) {
      for (double sign : {-1.0, 1.0}) {
        const double kk = sign * k;
        const double expansion = L + kk * L * L / 2.0;
        EXPECT_LE(std::abs(ttlr::log_t(x, Temperature(1.0 - kk)) - expansion),
                  kk * kk * std::abs(L * L * L) + 1e-14 * std::max(1.0, std::abs(L)))
            << "x=" << x << " k=" << kk;
        const double y = 0.7 * L;
        EXPECT_LE(std::abs(ttlr::exp_t(y, Temperature(1.0 - kk)) - std::exp(y) * (1.0 - kk * y * y / 2.0)),
                  kk * kk * std::exp(std::abs(y)) * std::pow(std::abs(y) + 1.0, 4) + 1e-14 * std::exp(y))
            << "y=" << y << " k=" << kk;
      }
    }
  }
}

TEST(TemperedKernels, BoundsAndMonotonicity) {
  for (double t : {0.2, 0.5, 0.9, 1.1, 1.5, 1.9}) {
    const Temperature T(t);
    const double bound = -1.0 / (1.0 - t);
    double prev_log = -std::numeric_limits<double>::infinity();
    for (double x = 1e-6; x < 1e6; x *= 1.7) {
      const double v = ttlr::log_t(x, T);
      if (t < 1.0) {
        EXPECT_GE(v, bound);
      } else {
        EXPECT_LE(v, bound);
      }
      EXPECT_GT(v, prev_log);
      prev_log = v;
    }
    double prev_exp = -1.0;
    for (double x = -20.0; x <= 3.0; x += 0.05) {
      const double v = ttlr::exp_t(x, T);
      if (!std::isfinite(v)) break;
      if (v == 0.0) {
        EXPECT_LT(t, 1.0);
        EXPECT_EQ(prev_exp <= 0.0, true);
      } else {
        EXPECT_GT(v, prev_exp);
      }
      prev_exp = v;
    }
  }
}

TEST(Tsallis, EntropyExamples) {
  const std::vector<double> det{1.0, 0.0}, fair{0.5, 0.5};
  EXPECT_EQ(ttlr::tsallis_entropy(det, Temperature(0.7)), 0.0);
  EXPECT_NEAR(ttlr::tsallis_entropy(fair, Temperature(1.0)), std::log(2.0), 1e-15);
  EXPECT_NEAR(ttlr::tsallis_entropy(fair, Temperature(1.5)),
              static_cast<double>(oracle::log_t(2.0L, 1.5L)), 1e-15);
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(ttlr::tsallis_entropy(bad, Temperature(1.0)), ttlr::ContractViolation);
}

TEST(Tsallis, DivergenceExamples) {
  const std::vector<double> p{0.2, 0.3, 0.5};
  for (double t : {0.4, 1.0, 1.7}) EXPECT_NEAR(ttlr::tsallis_divergence(p, p, Temperature(t)), 0.0, 1e-15);
  const std::vector<double> one{1.0, 0.0}, half{0.5, 0.5}, q{0.25, 0.75};
  EXPECT_NEAR(ttlr::tsallis_divergence(one, half, Temperature(1.0)), std::log(2.0), 1e-15);
  EXPECT_NEAR(ttlr::tsallis_divergence(one, q, Temperature(0.5)), 1.0, 1e-15);
  EXPECT_THROW(ttlr::tsallis_divergence(one, p, Temperature(1.0)), ttlr::ContractViolation);
}

TEST(Tsallis, DivergenceNonNegativeOnRandomSimplices) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t C = 2 + trial % 9;
    std::vector<double> p(C), q(C);
    double zp = 0.0, zq = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      zp += (p[c] = u(rng) < 0.2 ? 0.0 : u(rng));
      zq += (q[c] = u(rng) + 1e-3);
    }
    if (zp == 0.0) continue;
    for (auto& v : p) v /= zp;
    for (auto& v : q) v /= zq;
    const Temperature t(0.1 + 1.8 * u(rng));
    EXPECT_GE(ttlr::tsallis_divergence(p, q, t), -1e-12);
  }
}
