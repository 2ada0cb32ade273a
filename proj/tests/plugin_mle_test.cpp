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

#include "toptwo/plugin_mle.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"
#include "toptwo/metrics.hpp"
#include "toptwo/model.hpp"

namespace toptwo {
namespace {

ResponseMatrix random_responses(std::mt19937_64& gen, int n, int m, int K, double density) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ResponseMatrix a(n, m, K);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (unit(gen) < density) a.set(i, j, 1 + static_cast<int>(gen() % static_cast<unsigned>(K)));
    }
  }
  return a;
}

TEST(LogWeight, MatchesFormula) {
  EXPECT_DOUBLE_EQ(mle_log_weight(3, 0.7, 0.8), std::log(3 * 0.7 / 0.3 * 0.8 + 1.0));
  EXPECT_DOUBLE_EQ(mle_log_weight(5, 0.0, 0.9), 0.0);
}

TEST(LogWeight, IncreasesWithReliability) {
  for (const double q : {0.55, 0.8, 0.99}) {
    double prev_a = mle_log_weight(4, 0.01, q);
    double prev_b = mle_log_weight(4, 0.01, 1.0 - q);
    for (double p = 0.02; p < 0.99; p += 0.01) {
      const double a = mle_log_weight(4, p, q);
      const double b = mle_log_weight(4, p, 1.0 - q);
      EXPECT_GT(a, prev_a);
      EXPECT_GT(b, prev_b);
      prev_a = a;
      prev_b = b;
    }
  }
}

TEST(PluginMle, WorkedExample) {
  ResponseMatrix a(2, 1, 3);
  a.set(0, 0, 2);
  a.set(1, 0, 1);
  const MlePrediction pred = plugin_mle(a, {0.7, 0.3}, {0.8});
  EXPECT_EQ(pred.g[0], 2);
  EXPECT_EQ(pred.h[0], 1);
  EXPECT_NEAR(pred.scores[0], 2.1159, 5e-5);
  const auto oracle = testing::brute_force_pair(a, 0, {0.7, 0.3}, 0.8);
  EXPECT_EQ(oracle.g, 2);
  EXPECT_EQ(oracle.h, 1);
  EXPECT_NEAR(oracle.score, pred.scores[0], 1e-12);
}

TEST(PluginMle, ZeroReliabilityTiesToFirstPair) {
  std::mt19937_64 gen(31);
  const ResponseMatrix a = random_responses(gen, 6, 12, 5, 0.8);
  const MlePrediction pred = plugin_mle(a, std::vector<double>(6, 0.0), std::vector<double>(12, 0.7));
  for (int j = 0; j < 12; ++j) {
    EXPECT_EQ(pred.g[static_cast<std::size_t>(j)], 1);
    EXPECT_EQ(pred.h[static_cast<std::size_t>(j)], 2);
    EXPECT_EQ(pred.scores[static_cast<std::size_t>(j)], 0.0);
  }
}

TEST(PluginMle, CertainTaskIsWeightedPlurality) {
  ResponseMatrix a(3, 1, 4);
  a.set(0, 0, 3);
  a.set(1, 0, 3);
  a.set(2, 0, 2);
  const MlePrediction pred = plugin_mle(a, {0.4, 0.4, 0.6}, {1.0});
  EXPECT_EQ(pred.g[0], 3);
  EXPECT_EQ(pred.h[0], 1);
}

TEST(PluginMle, RejectsReliabilityOfOne) {
  ResponseMatrix a(1, 1, 3);
  a.set(0, 0, 1);
  EXPECT_THROW(plugin_mle(a, {1.0}, {0.8}), std::invalid_argument);
}

TEST(PluginMle, MatchesEnumeration) {
  std::mt19937_64 gen(32);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int inst = 0; inst < 200; ++inst) {
    const int n = 1 + static_cast<int>(gen() % 5);
    const int m = 1 + static_cast<int>(gen() % 20);
    const int K = 3 + static_cast<int>(gen() % 4);
    const ResponseMatrix a = random_responses(gen, n, m, K, 0.7);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = 0.99 * unit(gen);
    std::vector<double> q(static_cast<std::size_t>(m));
    for (auto& v : q) v = 0.5 + 0.5 * (1.0 - unit(gen));
    const MlePrediction pred = plugin_mle(a, p, q);
    for (int j = 0; j < m; ++j) {
      const auto want = testing::brute_force_pair(a, j, p, q[static_cast<std::size_t>(j)]);
      EXPECT_EQ(pred.g[static_cast<std::size_t>(j)], want.g);
      EXPECT_EQ(pred.h[static_cast<std::size_t>(j)], want.h);
    }
  }
}

TEST(PluginMle, WorkerPermutationInvariant) {
  std::mt19937_64 gen(33);
  const int n = 12;
  const ResponseMatrix a = random_responses(gen, n, 40, 5, 0.6);
  std::vector<double> p(n);
  for (auto& v : p) v = std::uniform_real_distribution<double>(0.0, 0.95)(gen);
  const std::vector<double> q(40, 0.75);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);
  ResponseMatrix b(n, 40, 5);
  std::vector<double> pb(n);
  for (int i = 0; i < n; ++i) {
    const int src = perm[static_cast<std::size_t>(i)];
    pb[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(src)];
    for (int j = 0; j < 40; ++j) b.set(i, j, a.at(src, j));
  }
  const MlePrediction x = plugin_mle(a, p, q);
  const MlePrediction y = plugin_mle(b, pb, q);
  EXPECT_EQ(x.g, y.g);
  EXPECT_EQ(x.h, y.h);
  for (std::size_t j = 0; j < 40; ++j) EXPECT_NEAR(x.scores[j], y.scores[j], 1e-12);
}

TEST(OracleMle, SingleConfidentWorker) {
  ModelParams params;
  params.n = 1;
  params.m = 1;
  params.K = 4;
  params.s = 1.0;
  params.p = {0.999};
  params.q = {0.9};
  params.g = {2};
  params.h = {4};
  ResponseMatrix a(1, 1, 4);
  a.set(0, 0, 3);
  const MlePrediction pred = oracle_mle(a, params);
  EXPECT_EQ(pred.g[0], 3);
  EXPECT_EQ(pred.h[0], 1);
}

TEST(OracleMle, EqualsPluginWithTruth) {
  std::mt19937_64 gen(34);
  ModelParams params = testing::random_params(gen, 20, 60, 5, 0.4);
  params.p[0] = 1.0;
  const ResponseMatrix a = sample_responses(params, 8);
  std::vector<double> clamped;
  for (const double p : params.p) clamped.push_back(clamp_reliability(p));
  const MlePrediction x = oracle_mle(a, params);
  const MlePrediction y = plugin_mle(a, clamped, params.q);
  EXPECT_EQ(x.g, y.g);
  EXPECT_EQ(x.h, y.h);
}

ResponseMatrix hits_fixture(int m, int K, int hits, int misses) {
  ResponseMatrix a(1, m, K);
  for (int j = 0; j < hits; ++j) a.set(0, j, 1);
  for (int j = hits; j < hits + misses; ++j) a.set(0, j, 3);
  return a;
}

TEST(Reliability, WorkedExample) {
  const int m = 1000;
  const ResponseMatrix a = hits_fixture(m, 4, 80, 20);
  const std::vector<Label> g(m, 1);
  const std::vector<Label> h(m, 2);
  const ReliabilityEstimate est = estimate_reliability_at_rate(a, g, h, 0.1);
  EXPECT_NEAR(est.p_hat_raw[0], 0.6, 1e-12);
  EXPECT_NEAR(est.p_hat[0], 0.6, 1e-12);
  const ReliabilityEstimate via_s = estimate_reliability(a, g, h, 0.2, 0.5);
  EXPECT_NEAR(via_s.p_hat_raw[0], 0.6, 1e-12);
}

TEST(Reliability, PerfectWorkerIsClamped) {
  const int m = 1000;
  const ResponseMatrix a = hits_fixture(m, 5, 100, 0);
  const ReliabilityEstimate est =
      estimate_reliability_at_rate(a, std::vector<Label>(m, 1), std::vector<Label>(m, 2), 0.1);
  EXPECT_NEAR(est.p_hat_raw[0], 1.0, 1e-12);
  EXPECT_EQ(est.p_hat[0], 1.0 - kReliabilityCeilingGap);
}

TEST(Reliability, UnobservedWorkerIsFlagged) {
  ResponseMatrix a(2, 10, 3);
  a.set(0, 0, 1);
  const ReliabilityEstimate est =
      estimate_reliability_at_rate(a, std::vector<Label>(10, 1), std::vector<Label>(10, 2), 0.5);
  EXPECT_FALSE(est.unobserved[0]);
  EXPECT_TRUE(est.unobserved[1]);
  EXPECT_EQ(est.p_hat[1], 0.0);
}

TEST(Reliability, UnbiasedGivenTruePairs) {
  const int m = 400;
  const double s = 0.5;
  const double s1 = 0.5;
  ModelParams params;
  params.n = 3;
  params.m = m;
  params.K = 5;
  params.s = s * (1.0 - s1);
  params.p = {0.0, 0.35, 0.8};
  std::mt19937_64 gen(35);
  for (int j = 0; j < m; ++j) {
    params.q.push_back(std::uniform_real_distribution<double>(0.55, 1.0)(gen));
    params.g.push_back(1 + static_cast<Label>(j % 5));
    params.h.push_back(1 + static_cast<Label>((j + 1) % 5));
  }
  const int reps = 1000;
  std::vector<double> sum(3, 0.0);
  std::vector<double> sum_sq(3, 0.0);
  for (int r = 0; r < reps; ++r) {
    const ResponseMatrix held_out = sample_responses(params, static_cast<std::uint64_t>(r) + 100);
    const ReliabilityEstimate est = estimate_reliability(held_out, params.g, params.h, s, s1);
    for (std::size_t i = 0; i < 3; ++i) {
      sum[i] += est.p_hat_raw[i];
      sum_sq[i] += est.p_hat_raw[i] * est.p_hat_raw[i];
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double mean = sum[i] / reps;
    const double sd = std::sqrt(sum_sq[i] / reps - mean * mean);
    EXPECT_NEAR(mean, params.p[i], 3.0 * sd / std::sqrt(static_cast<double>(reps))) << "worker " << i;
  }
}

TEST(OuterSplit, PartitionsAndConcentrates) {
  std::mt19937_64 gen(36);
  const ResponseMatrix a = random_responses(gen, 100, 200, 5, 0.6);
  const auto [first, second] = outer_split(a, 0.3, 17);
  std::size_t kept = 0;
  for (int i = 0; i < a.workers(); ++i) {
    for (int j = 0; j < a.tasks(); ++j) {
      if (!a.observed(i, j)) {
        EXPECT_FALSE(first.observed(i, j) || second.observed(i, j));
        continue;
      }
      EXPECT_NE(first.observed(i, j), second.observed(i, j));
      EXPECT_EQ(first.at(i, j) + second.at(i, j), a.at(i, j));
      kept += first.observed(i, j) ? 1 : 0;
    }
  }
  const double total = static_cast<double>(a.observed_count());
  EXPECT_LT(std::abs(kept - 0.3 * total), 4.0 * std::sqrt(total * 0.3 * 0.7));
}

TEST(OuterSplit, FullKeepLeavesHeldOutEmpty) {
  std::mt19937_64 gen(37);
  const ResponseMatrix a = random_responses(gen, 10, 20, 4, 0.5);
  const auto [first, second] = outer_split(a, 1.0, 3);
  EXPECT_EQ(first, a);
  EXPECT_EQ(second.observed_count(), 0u);
}

TEST(TopTwo2, DeterministicUnderSeed) {
  std::mt19937_64 gen(38);
  const ModelParams params = testing::random_params(gen, 30, 150, 5, 0.4);
  const ResponseMatrix a = sample_responses(params, 6);
  SpectralConfig cfg;
  cfg.seed = 12;
  const TopTwo2Result x = toptwo2(a, 0.4, 0.5, cfg);
  const TopTwo2Result y = toptwo2(a, 0.4, 0.5, cfg);
  EXPECT_EQ(x.prediction.g, y.prediction.g);
  EXPECT_EQ(x.prediction.h, y.prediction.h);
  EXPECT_EQ(x.reliability.p_hat, y.reliability.p_hat);
  EXPECT_EQ(x.stage1.q_hat, y.stage1.q_hat);
}

TEST(TopTwo2, DensityStandsInForUnknownS) {
  std::mt19937_64 gen(39);
  const ModelParams params = testing::random_params(gen, 30, 150, 4, 0.3);
  const ResponseMatrix a = sample_responses(params, 7);
  const TopTwo2Result res = toptwo2(a, std::nullopt, 0.5, SpectralConfig{});
  EXPECT_DOUBLE_EQ(res.s_used, a.density());
}

TEST(TopTwo2, FallbackFollowsDegenerateStageOne) {
  std::mt19937_64 gen(41);
  for (int seed = 0; seed < 40; ++seed) {
    ModelParams params = testing::random_params(gen, 20, 60, 4, 0.3);
    std::fill(params.p.begin(), params.p.end(), 0.0);
    const ResponseMatrix a = sample_responses(params, static_cast<std::uint64_t>(seed));
    SpectralConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const TopTwo2Result res = toptwo2(a, 0.3, 0.5, cfg);
    EXPECT_EQ(res.fell_back_to_majority, res.stage1.degenerate);
  }
}

TEST(TopTwo2, RefinesOnDenseData) {
  std::mt19937_64 gen(40);
  const ModelParams params = testing::random_params(gen, 100, 300, 4, 0.8, 0.6, 0.9);
  const ResponseMatrix a = sample_responses(params, 9);
  const TopTwo2Result res = toptwo2(a, 0.8, 0.5, SpectralConfig{});
  const EvalReport two = evaluate(PredictionView{res.prediction.g, res.prediction.h}, params);
  const MlePrediction oracle = oracle_mle(a, params);
  const EvalReport best = evaluate(PredictionView{oracle.g, oracle.h}, params);
  EXPECT_LE(best.pair_error, two.pair_error + 0.02);
  EXPECT_LT(two.g_error, 0.05);
}

}  // namespace
}  // namespace toptwo
