// Copyright 2026 The TopTwo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "toptwo/binary_views.hpp"

#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace toptwo {
namespace {

// r^(k) = k/K - (reliable mass on labels <= k), straight from the mean of
// the centered view.
double r_oracle(int g, int h, double q, int K, int k) {
  const double below = (g <= k ? q : 0.0) + (h <= k ? 1.0 - q : 0.0);
  return static_cast<double>(k) / K - below;
}

TEST(Binarize, ThresholdCases) {
  ResponseMatrix a(1, 3, 5);
  a.set(0, 0, 3);
  a.set(0, 2, 5);
  const auto at3 = binarize(a, 3);
  const auto at2 = binarize(a, 2);
  EXPECT_EQ(at3(0, 0), -1.0);
  EXPECT_EQ(at2(0, 0), 1.0);
  EXPECT_EQ(at3(0, 1), 0.0);
  EXPECT_EQ(at2(0, 1), 0.0);
  EXPECT_EQ(at3(0, 2), 1.0);
}

TEST(Binarize, SignCountsMatchObservedCounts) {
  std::mt19937_64 gen(1);
  const auto params = testing::random_params(gen, 30, 40, 6, 0.4);
  const auto a = sample_responses(params, 2);
  for (int k = 1; k < 6; ++k) {
    const auto b = binarize(a, k);
    for (int j = 0; j < 40; ++j) {
      int minus = 0;
      int plus = 0;
      int below = 0;
      for (int i = 0; i < 30; ++i) {
        minus += b(i, j) == -1.0;
        plus += b(i, j) == 1.0;
        below += a.observed(i, j) && a.at(i, j) <= k;
      }
      EXPECT_EQ(minus + plus, static_cast<int>(a.observed_in_task(j)));
      EXPECT_EQ(minus, below);
    }
  }
}

TEST(Binarize, MonotoneInThreshold) {
  std::mt19937_64 gen(2);
  const auto params = testing::random_params(gen, 20, 20, 7, 0.5);
  const auto a = sample_responses(params, 3);
  for (int k = 1; k + 1 < 7; ++k) {
    const auto lo = binarize(a, k);
    const auto hi = binarize(a, k + 1);
    EXPECT_TRUE(((lo.array() == -1.0) <= (hi.array() == -1.0)).all());
  }
}

TEST(Center, ShiftValues) {
  const Eigen::MatrixXd raw = Eigen::MatrixXd::Constant(2, 2, 1.0);
  EXPECT_TRUE(center(raw, 0.3, 4, 2).isApprox(raw));
  EXPECT_NEAR(centering_shift(0.1, 5, 1), 0.06, 1e-15);
  EXPECT_NEAR(center(raw, 0.1, 5, 1)(1, 1), 1.0 - 0.06, 1e-15);
}

TEST(Center, Invertible) {
  Eigen::MatrixXd raw(2, 3);
  raw << -1, 0, 1, 1, 1, 0;
  for (int k = 1; k < 6; ++k) {
    EXPECT_LT((uncenter(center(raw, 0.37, 6, k), 0.37, 6, k) - raw).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Center, RejectsBadRate) {
  const Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_THROW(center(raw, 0.0, 4, 1), std::invalid_argument);
  EXPECT_THROW(center(raw, 1.5, 4, 1), std::invalid_argument);
}

TEST(RValue, CaseOneExample) {
  EXPECT_NEAR(r_value(2, 1, 0.8, 3, 1), 0.1333, 5e-5);
  EXPECT_NEAR(r_value(2, 1, 0.8, 3, 2), -0.3333, 5e-5);
}

TEST(RValue, CaseTwoExample) {
  EXPECT_NEAR(r_value(1, 2, 0.8, 4, 1), -0.55, 1e-12);
  EXPECT_NEAR(r_value(1, 2, 0.8, 4, 2), -0.5, 1e-12);
  EXPECT_NEAR(r_value(1, 2, 0.8, 4, 3), -0.25, 1e-12);
}

TEST(RValue, MatchesMassOracleAndBoundaries) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> qd(0.5 + 1e-9, 1.0);
  for (int t = 0; t < 500; ++t) {
    const int K = 3 + static_cast<int>(gen() % 8);
    const int g = 1 + static_cast<int>(gen() % K);
    int h = 1 + static_cast<int>(gen() % K);
    if (h == g) h = g % K + 1;
    const double q = qd(gen);
    EXPECT_EQ(r_value(g, h, q, K, 0), 0.0);
    EXPECT_NEAR(r_value(g, h, q, K, K), 0.0, 1e-15);
    for (int k = 1; k < K; ++k) EXPECT_NEAR(r_value(g, h, q, K, k), r_oracle(g, h, q, K, k), 1e-14);
  }
}

TEST(RValue, RejectsEqualPair) { EXPECT_THROW(r_value(2, 2, 0.8, 4, 1), std::invalid_argument); }

TEST(DeltaR, WorkedExample) {
  const auto d = delta_r(2, 1, 0.8, 3);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_NEAR(d[0], 0.1333, 5e-5);
  EXPECT_NEAR(d[1], -0.4667, 5e-5);
  EXPECT_NEAR(d[2], 0.3333, 5e-5);
}

TEST(DeltaR, LevelsSumAndOrdering) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> qd(0.51, 0.99);
  for (int t = 0; t < 500; ++t) {
    const int K = 3 + static_cast<int>(gen() % 8);
    const int g = 1 + static_cast<int>(gen() % K);
    int h = 1 + static_cast<int>(gen() % K);
    if (h == g) h = g % K + 1;
    const double q = qd(gen);
    const auto d = delta_r(g, h, q, K);
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
      total += d[k - 1];
      const double want = k == g ? 1.0 / K - q : k == h ? 1.0 / K - (1.0 - q) : 1.0 / K;
      EXPECT_NEAR(d[k - 1], want, 1e-14);
    }
    EXPECT_NEAR(total, 0.0, 1e-14);
    for (int k = 1; k <= K; ++k) {
      if (k != g) EXPECT_LT(d[g - 1], d[k - 1]);
      if (k != g && k != h) EXPECT_LT(d[h - 1], d[k - 1]);
    }
  }
}

TEST(DeltaR, ConfusionOneFlattensH) {
  const auto d = delta_r(3, 1, 1.0, 5);
  EXPECT_NEAR(d[0], 0.2, 1e-15);
  EXPECT_NEAR(d[1], 0.2, 1e-15);
  EXPECT_NEAR(d[2], 0.2 - 1.0, 1e-15);
}

TEST(BinaryView, CarriesBothForms) {
  ResponseMatrix a(2, 2, 4);
  a.set(0, 0, 1);
  a.set(1, 1, 4);
  const auto view = make_binary_view(a, 1, 0.5);
  EXPECT_EQ(view.k, 1);
  EXPECT_EQ(view.s_eff, 0.5);
  EXPECT_EQ(view.raw(0, 0), -1.0);
  EXPECT_NEAR(view.centered(0, 1), -0.25, 1e-15);
  EXPECT_NEAR(view.centered(1, 1), 0.75, 1e-15);
}

}  // namespace
}  // namespace toptwo
