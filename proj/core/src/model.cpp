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

#include "toptwo/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "toptwo/binary_views.hpp"
#include "toptwo/rng.hpp"

namespace toptwo {
namespace {

[[noreturn]] void reject(const std::string& what) {
  throw std::invalid_argument("invalid model parameters: " + what);
}

// KL(a || b) in nats. Terms with zero mass in `a` contribute nothing; mass in
// `a` over a zero in `b` makes the divergence infinite.
double kl_divergence(const LabelDistribution& a, const LabelDistribution& b) {
  double total = 0.0;
  for (std::size_t c = 0; c < a.probs.size(); ++c) {
    const double pa = a.probs[c];
    const double pb = b.probs[c];
    if (pa <= 0.0) continue;
    if (pb <= 0.0) return std::numeric_limits<double>::infinity();
    total += pa * std::log(pa / pb);
  }
  return total;
}

}  // namespace

void validate(const ModelParams& params) {
  if (params.n <= 0) reject("n must be positive");
  if (params.m <= 0) reject("m must be positive");
  if (params.K < 3) reject("K must be at least 3");
  if (!(params.s > 0.0 && params.s <= 1.0)) reject("s must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(params.n);
  const auto m = static_cast<std::size_t>(params.m);
  if (params.p.size() != n) reject("p has " + std::to_string(params.p.size()) + " entries, expected n");
  if (params.q.size() != m || params.g.size() != m || params.h.size() != m) {
    reject("q, g and h must each have m entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(params.p[i] >= 0.0 && params.p[i] <= 1.0)) {
      reject("p[" + std::to_string(i) + "] outside [0, 1]");
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(params.q[j] > 0.5 && params.q[j] <= 1.0)) {
      reject("q[" + std::to_string(j) + "] outside (1/2, 1]");
    }
    const Label g = params.g[j];
    const Label h = params.h[j];
    if (g < 1 || g > params.K || h < 1 || h > params.K) {
      reject("top-two labels of task " + std::to_string(j) + " outside [1, K]");
    }
    if (g == h) reject("task " + std::to_string(j) + " has g == h");
  }
}

LabelDistribution label_distribution(double p, double q, Label a, Label b, int K) {
  if (a == b) throw std::invalid_argument("label_distribution: a and b must differ");
  if (K < 2 || a < 1 || a > K || b < 1 || b > K) {
    throw std::invalid_argument("label_distribution: labels outside [1, K]");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("label_distribution: p outside [0, 1]");
  if (!(q > 0.5 && q <= 1.0)) throw std::invalid_argument("label_distribution: q outside (1/2, 1]");
  const double base = (1.0 - p) / K;
  LabelDistribution dist{std::vector<double>(static_cast<std::size_t>(K), base)};
  dist.probs[static_cast<std::size_t>(a - 1)] = p * q + base;
  dist.probs[static_cast<std::size_t>(b - 1)] = p * (1.0 - q) + base;
  return dist;
}

std::vector<double> branch_probabilities(double p, double q, double s, Label g, Label h, int K) {
  const LabelDistribution dist = label_distribution(p, q, g, h, K);
  std::vector<double> out(static_cast<std::size_t>(K) + 1);
  out[0] = 1.0 - s;
  for (int c = 1; c <= K; ++c) out[static_cast<std::size_t>(c)] = s * dist(c);
  return out;
}

Label draw_cell(double s, std::span<const double> conditional, std::uint64_t seed, int worker,
                int task) {
  StreamRng rng(seed, Stream::kResponses, static_cast<std::uint64_t>(worker),
                static_cast<std::uint64_t>(task));
  const double assign = rng.uniform();
  const double pick = rng.uniform();
  if (assign >= s) return kUnobserved;
  double cumulative = 0.0;
  const auto last = static_cast<Label>(conditional.size());
  for (Label c = 1; c < last; ++c) {
    cumulative += conditional[static_cast<std::size_t>(c - 1)];
    if (pick < cumulative) return c;
  }
  return last;
}

ResponseMatrix sample_responses(const ModelParams& params, std::uint64_t seed) {
  validate(params);
  ResponseMatrix out(params.n, params.m, params.K);
  for (int i = 0; i < params.n; ++i) {
    for (int j = 0; j < params.m; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const LabelDistribution dist = label_distribution(params.p[static_cast<std::size_t>(i)],
                                                        params.q[ju], params.g[ju], params.h[ju],
                                                        params.K);
      out.set(i, j, draw_cell(params.s, dist.probs, seed, i, j));
    }
  }
  return out;
}

Eigen::MatrixXd expected_centered_matrix(const ModelParams& params, int k, double s_eff) {
  validate(params);
  if (k < 1 || k >= params.K) throw std::invalid_argument("threshold k must satisfy 1 <= k < K");
  Eigen::VectorXd p(params.n);
  for (int i = 0; i < params.n; ++i) p(i) = params.p[static_cast<std::size_t>(i)];
  Eigen::VectorXd r(params.m);
  for (int j = 0; j < params.m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    r(j) = r_value(params.g[ju], params.h[ju], params.q[ju], params.K, k);
  }
  return (2.0 * s_eff) * p * r.transpose();
}

double min_pairwise_kl(const ModelParams& params, int task) {
  validate(params);
  if (task < 0 || task >= params.m) throw std::out_of_range("task index out of range");
  const auto ju = static_cast<std::size_t>(task);
  const Label g = params.g[ju];
  const Label h = params.h[ju];
  const double q = params.q[ju];
  double best = std::numeric_limits<double>::infinity();
  for (Label a = 1; a <= params.K; ++a) {
    for (Label b = 1; b <= params.K; ++b) {
      if (a == b || (a == g && b == h)) continue;
      double sum = 0.0;
      for (const double p : params.p) {
        sum += kl_divergence(label_distribution(p, q, g, h, params.K),
                             label_distribution(p, q, a, b, params.K));
      }
      best = std::min(best, sum / params.n);
    }
  }
  return best;
}

double min_pairwise_kl_all(const ModelParams& params) {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < params.m; ++j) best = std::min(best, min_pairwise_kl(params, j));
  return best;
}

std::vector<double> reference_norms(const ModelParams& params) {
  validate(params);
  std::vector<double> norms;
  for (int k = 1; k < params.K; ++k) {
    double sq = 0.0;
    for (int j = 0; j < params.m; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const double r = r_value(params.g[ju], params.h[ju], params.q[ju], params.K, k);
      sq += r * r;
    }
    norms.push_back(std::sqrt(sq));
  }
  return norms;
}

}  // namespace toptwo
