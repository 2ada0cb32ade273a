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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "toptwo/metrics.hpp"
#include "toptwo/rng.hpp"

namespace toptwo {

double clamp_reliability(double p) {
  return std::clamp(p, 0.0, 1.0 - kReliabilityCeilingGap);
}

double mle_log_weight(int K, double p, double q) {
  return std::log(static_cast<double>(K) * p * q / (1.0 - p) + 1.0);
}

std::pair<ResponseMatrix, ResponseMatrix> outer_split(const ResponseMatrix& responses, double s1,
                                                      std::uint64_t seed) {
  if (!(s1 > 0.0 && s1 <= 1.0)) throw std::invalid_argument("outer_split: s1 must lie in (0, 1]");
  ResponseMatrix kept = responses.empty_like();
  ResponseMatrix held_out = responses.empty_like();
  for (int i = 0; i < responses.workers(); ++i) {
    for (int j = 0; j < responses.tasks(); ++j) {
      const Label a = responses.at(i, j);
      if (a == kUnobserved) continue;
      StreamRng rng(seed, Stream::kOuterSplit, static_cast<std::uint64_t>(i),
                    static_cast<std::uint64_t>(j));
      (rng.uniform() < s1 ? kept : held_out).set(i, j, a);
    }
  }
  return {std::move(kept), std::move(held_out)};
}

ReliabilityEstimate estimate_reliability_at_rate(const ResponseMatrix& held_out,
                                                 const std::vector<Label>& g_hat,
                                                 const std::vector<Label>& h_hat,
                                                 double effective_rate) {
  const int K = held_out.choices();
  const int n = held_out.workers();
  const int m = held_out.tasks();
  if (K < 3) throw std::invalid_argument("estimate_reliability: needs K >= 3");
  if (!(effective_rate > 0.0)) {
    throw std::invalid_argument("estimate_reliability: s (1 - s1) must be positive");
  }
  if (g_hat.size() != static_cast<std::size_t>(m) || h_hat.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("estimate_reliability: label vectors do not match the task count");
  }

  ReliabilityEstimate out;
  out.effective_rate = effective_rate;
  out.p_hat.resize(static_cast<std::size_t>(n));
  out.p_hat_raw.resize(static_cast<std::size_t>(n));
  out.unobserved.assign(static_cast<std::size_t>(n), false);
  const double scale = static_cast<double>(K) / static_cast<double>(K - 2);
  const double chance = 2.0 / static_cast<double>(K);
  const double denom = static_cast<double>(m) * effective_rate;
  for (int i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    std::size_t hits = 0;
    std::size_t seen = 0;
    for (int j = 0; j < m; ++j) {
      const Label a = held_out.at(i, j);
      if (a == kUnobserved) continue;
      ++seen;
      const auto ju = static_cast<std::size_t>(j);
      if (a == g_hat[ju] || a == h_hat[ju]) ++hits;
    }
    if (seen == 0) {
      out.unobserved[iu] = true;
      out.p_hat_raw[iu] = 0.0;
      out.p_hat[iu] = 0.0;
      continue;
    }
    out.p_hat_raw[iu] = scale * (static_cast<double>(hits) / denom - chance);
    out.p_hat[iu] = clamp_reliability(out.p_hat_raw[iu]);
  }
  return out;
}

ReliabilityEstimate estimate_reliability(const ResponseMatrix& held_out,
                                         const std::vector<Label>& g_hat,
                                         const std::vector<Label>& h_hat, double s, double s1) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("estimate_reliability: s outside (0, 1]");
  if (!(s1 >= 0.0 && s1 < 1.0)) throw std::invalid_argument("estimate_reliability: s1 outside [0, 1)");
  return estimate_reliability_at_rate(held_out, g_hat, h_hat, s * (1.0 - s1));
}

MlePrediction plugin_mle(const ResponseMatrix& responses, const std::vector<double>& p_hat,
                         const std::vector<double>& q_hat) {
  const int K = responses.choices();
  const int n = responses.workers();
  const int m = responses.tasks();
  if (p_hat.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("plugin_mle: p_hat has " + std::to_string(p_hat.size()) +
                                " entries for " + std::to_string(n) + " workers");
  }
  if (q_hat.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("plugin_mle: q_hat does not match the task count");
  }
  for (const double p : p_hat) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("plugin_mle: p_hat must lie in [0, 1)");
  }
  for (const double q : q_hat) {
    if (!(q > 0.5 && q <= 1.0)) throw std::invalid_argument("plugin_mle: q_hat must lie in (1/2, 1]");
  }

  MlePrediction out;
  out.g.resize(static_cast<std::size_t>(m));
  out.h.resize(static_cast<std::size_t>(m));
  out.scores.resize(static_cast<std::size_t>(m));
  const auto slots = static_cast<std::size_t>(K) + 1;
  std::vector<double> first(slots);
  std::vector<double> second(slots);
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const double q = q_hat[ju];
    std::fill(first.begin(), first.end(), 0.0);
    std::fill(second.begin(), second.end(), 0.0);
    // Accumulated in worker order.
    for (int i = 0; i < n; ++i) {
      const Label a = responses.at(i, j);
      if (a == kUnobserved) continue;
      const double p = p_hat[static_cast<std::size_t>(i)];
      first[static_cast<std::size_t>(a)] += mle_log_weight(K, p, q);
      second[static_cast<std::size_t>(a)] += mle_log_weight(K, p, 1.0 - q);
    }
    Label best_a = 0;
    Label best_b = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (Label a = 1; a <= K; ++a) {
      for (Label b = 1; b <= K; ++b) {
        if (a == b) continue;
        const double score = first[static_cast<std::size_t>(a)] + second[static_cast<std::size_t>(b)];
        if (score > best) {
          best = score;
          best_a = a;
          best_b = b;
        }
      }
    }
    out.g[ju] = best_a;
    out.h[ju] = best_b;
    out.scores[ju] = best;
  }
  return out;
}

MlePrediction oracle_mle(const ResponseMatrix& responses, const ModelParams& params) {
  validate(params);
  if (responses.workers() != params.n || responses.tasks() != params.m ||
      responses.choices() != params.K) {
    throw std::invalid_argument("oracle_mle: responses do not match the model dimensions");
  }
  std::vector<double> p(params.p.size());
  std::transform(params.p.begin(), params.p.end(), p.begin(), clamp_reliability);
  return plugin_mle(responses, p, params.q);
}

TopTwo2Result toptwo2(const ResponseMatrix& responses, std::optional<double> s, double s1,
                      const SpectralConfig& cfg) {
  validate(cfg);
  if (!(s1 > 0.0 && s1 < 1.0)) throw std::invalid_argument("toptwo2: s1 must lie in (0, 1)");
  if (s && !(*s > 0.0 && *s <= 1.0)) throw std::invalid_argument("toptwo2: s outside (0, 1]");
  if (responses.choices() < 3) throw std::invalid_argument("toptwo2: needs K >= 3");

  TopTwo2Result out;
  out.s_used = s ? *s : responses.density();
  auto [kept, held_out] = outer_split(responses, s1, derive_seed(cfg.seed, Stream::kOuterSplit));

  SpectralConfig stage1_cfg = cfg;
  if (s && !stage1_cfg.s_prime) stage1_cfg.s_prime = *s * s1 / 2.0;
  out.stage1 = toptwo1(kept, stage1_cfg);

  std::vector<Label> g_plug = out.stage1.g_hat;
  std::vector<Label> h_plug = out.stage1.h_hat;
  if (out.stage1.degenerate) {
    const TopTwoPairs mv = majority_vote_top_two(kept);
    g_plug = mv.g;
    h_plug = mv.h;
    out.fell_back_to_majority = true;
  }

  const double rate = s ? *s * (1.0 - s1) : held_out.density();
  if (!(rate > 0.0)) throw std::invalid_argument("toptwo2: held-out half has no responses");
  out.reliability = estimate_reliability_at_rate(held_out, g_plug, h_plug, rate);
  out.prediction = plugin_mle(responses, out.reliability.p_hat, out.stage1.q_hat);
  return out;
}

}  // namespace toptwo
