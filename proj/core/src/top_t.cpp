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

#include "toptwo/top_t.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "toptwo/binary_views.hpp"
#include "toptwo/model.hpp"
#include "toptwo/rng.hpp"

namespace toptwo {
namespace {

constexpr double kBudgetTolerance = 1e-12;
constexpr double kLowerRankFloor = 1e-9;

[[noreturn]] void reject(const std::string& what) {
  throw std::invalid_argument("invalid top-T parameters: " + what);
}

// 1 - sum(q), snapped to zero inside the closure tolerance.
double residual_mass(const std::vector<double>& q) {
  double total = 0.0;
  for (const double v : q) total += v;
  const double residual = 1.0 - total;
  return std::abs(residual) <= kBudgetTolerance ? 0.0 : residual;
}

double top_rank_floor(int T) { return 1.0 / static_cast<double>(T) + 1e-9; }

std::vector<Label> first_labels(int T) {
  std::vector<Label> out(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) out[static_cast<std::size_t>(t)] = t + 1;
  return out;
}

// Labels ranked by response count, ties to the smaller label.
std::vector<std::vector<Label>> majority_rank(const ResponseMatrix& responses, int T) {
  const int K = responses.choices();
  std::vector<std::vector<Label>> out(static_cast<std::size_t>(responses.tasks()));
  std::vector<int> counts(static_cast<std::size_t>(K) + 1);
  for (int j = 0; j < responses.tasks(); ++j) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < responses.workers(); ++i) {
      ++counts[static_cast<std::size_t>(responses.at(i, j))];
    }
    std::vector<Label> labels(static_cast<std::size_t>(K));
    for (Label c = 1; c <= K; ++c) labels[static_cast<std::size_t>(c - 1)] = c;
    std::stable_sort(labels.begin(), labels.end(), [&](Label a, Label b) {
      return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
    });
    labels.resize(static_cast<std::size_t>(T));
    out[static_cast<std::size_t>(j)] = std::move(labels);
  }
  return out;
}

void check_rank(int K, int T) {
  if (T < 2) throw std::invalid_argument("top-T needs T >= 2");
  if (T >= K) throw std::invalid_argument("top-T needs T < K");
}

}  // namespace

void validate(const TopTParams& params) {
  if (params.n <= 0 || params.m <= 0) reject("n and m must be positive");
  if (params.K < 3) reject("K must be at least 3");
  if (params.T < 2 || params.T > params.K - 1) reject("T must satisfy 2 <= T <= K - 1");
  if (!(params.s > 0.0 && params.s <= 1.0)) reject("s must lie in (0, 1]");
  if (params.p.size() != static_cast<std::size_t>(params.n)) reject("p must have n entries");
  if (params.answers.size() != static_cast<std::size_t>(params.m) ||
      params.q.size() != static_cast<std::size_t>(params.m)) {
    reject("answers and q must have m rows");
  }
  for (const double p : params.p) {
    if (!(p >= 0.0 && p <= 1.0)) reject("p outside [0, 1]");
  }
  const auto T = static_cast<std::size_t>(params.T);
  for (int j = 0; j < params.m; ++j) {
    const auto& answers = params.answers[static_cast<std::size_t>(j)];
    const auto& q = params.q[static_cast<std::size_t>(j)];
    const std::string task = "task " + std::to_string(j) + ": ";
    if (answers.size() != T || q.size() != T) reject(task + "rows must have T entries");
    for (std::size_t t = 0; t < T; ++t) {
      if (answers[t] < 1 || answers[t] > params.K) reject(task + "answer outside [1, K]");
      for (std::size_t u = 0; u < t; ++u) {
        if (answers[u] == answers[t]) reject(task + "answers must be distinct");
      }
      if (!(q[t] > 0.0 && q[t] <= 1.0)) reject(task + "confusion probability outside (0, 1]");
      if (t > 0 && q[t] > q[t - 1]) reject(task + "confusion probabilities must be descending");
    }
    const double residual = residual_mass(q);
    if (residual < 0.0) reject(task + "confusion probabilities sum above 1");
    if (!(q[T - 1] > residual)) reject(task + "last confusion probability must exceed 1 - sum(q)");
    for (int i = 0; i < params.n; ++i) {
      const std::vector<double> dist = top_t_label_distribution(params, i, j);
      double total = 0.0;
      for (const double v : dist) {
        if (v < 0.0) reject(task + "negative branch probability");
        total += v;
      }
      if (std::abs(total - 1.0) > kBudgetTolerance) {
        reject(task + "branch probabilities sum to " + std::to_string(total) + ", not 1");
      }
    }
  }
}

std::vector<double> top_t_label_distribution(const TopTParams& params, int worker, int task) {
  const double p = params.p[static_cast<std::size_t>(worker)];
  const auto& answers = params.answers[static_cast<std::size_t>(task)];
  const auto& q = params.q[static_cast<std::size_t>(task)];
  const double base = (1.0 - p) / params.K;
  const double residual = residual_mass(q);
  std::vector<double> dist(static_cast<std::size_t>(params.K), residual == 0.0 ? base : p * residual + base);
  for (std::size_t t = 0; t < answers.size(); ++t) {
    dist[static_cast<std::size_t>(answers[t] - 1)] = p * q[t] + base;
  }
  return dist;
}

ResponseMatrix sample_responses_top_t(const TopTParams& params, std::uint64_t seed) {
  validate(params);
  ResponseMatrix out(params.n, params.m, params.K);
  for (int i = 0; i < params.n; ++i) {
    for (int j = 0; j < params.m; ++j) {
      const std::vector<double> dist = top_t_label_distribution(params, i, j);
      out.set(i, j, draw_cell(params.s, dist, seed, i, j));
    }
  }
  return out;
}

Eigen::MatrixXd expected_centered_matrix_top_t(const TopTParams& params, int k, double s_eff) {
  validate(params);
  if (k < 1 || k >= params.K) throw std::invalid_argument("threshold k must satisfy 1 <= k < K");
  Eigen::VectorXd p(params.n);
  for (int i = 0; i < params.n; ++i) p(i) = params.p[static_cast<std::size_t>(i)];
  Eigen::VectorXd r(params.m);
  for (int j = 0; j < params.m; ++j) {
    const auto& answers = params.answers[static_cast<std::size_t>(j)];
    const auto& q = params.q[static_cast<std::size_t>(j)];
    const double residual = residual_mass(q);
    double reliable_mass = 0.0;
    for (Label c = 1; c <= k; ++c) {
      const auto hit = std::find(answers.begin(), answers.end(), c);
      reliable_mass += hit == answers.end() ? residual : q[static_cast<std::size_t>(hit - answers.begin())];
    }
    r(j) = static_cast<double>(k) / params.K - reliable_mass;
  }
  return (2.0 * s_eff) * p * r.transpose();
}

std::vector<std::vector<Label>> read_top_t(const ProjectionStack& v, int T) {
  const int K = static_cast<int>(v.cols()) - 1;
  check_rank(K, T);
  std::vector<std::vector<Label>> out(static_cast<std::size_t>(v.rows()));
  std::vector<bool> taken(static_cast<std::size_t>(K) + 1);
  for (Eigen::Index j = 0; j < v.rows(); ++j) {
    std::fill(taken.begin(), taken.end(), false);
    auto& ranked = out[static_cast<std::size_t>(j)];
    for (int t = 0; t < T; ++t) {
      Label best = 0;
      double best_val = 0.0;
      for (int k = 1; k <= K; ++k) {
        if (taken[static_cast<std::size_t>(k)]) continue;
        const double dv = v(j, k) - v(j, k - 1);
        if (best == 0 || dv < best_val) {
          best = k;
          best_val = dv;
        }
      }
      taken[static_cast<std::size_t>(best)] = true;
      ranked.push_back(best);
    }
  }
  return out;
}

void estimate_q_top_t(TopTEstimate& est, int T) {
  const auto& v = est.v;
  const int K = static_cast<int>(v.cols()) - 1;
  check_rank(K, T);
  const auto m = static_cast<std::size_t>(v.rows());
  const bool has_mask = !est.unobserved.empty();

  double total = 0.0;
  std::size_t counted = 0;
  std::vector<bool> selected(static_cast<std::size_t>(K) + 1);
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    std::fill(selected.begin(), selected.end(), false);
    for (const Label a : est.answers[j]) selected[static_cast<std::size_t>(a)] = true;
    double rest = 0.0;
    for (int k = 1; k <= K; ++k) {
      if (selected[static_cast<std::size_t>(k)]) continue;
      rest += v(row, k) - v(row, k - 1);
    }
    const double l_j = static_cast<double>(K) / static_cast<double>(K - T) * rest;
    if (!has_mask || !est.unobserved[j]) {
      total += l_j;
      ++counted;
    }
  }
  est.l = counted > 0 ? total / static_cast<double>(counted) : 0.0;
  est.degenerate = counted == 0 || !(est.l > 0.0);

  est.q_hat.assign(m, std::vector<double>(static_cast<std::size_t>(T)));
  est.q_hat_raw.assign(m, std::vector<double>(static_cast<std::size_t>(T)));
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = static_cast<Eigen::Index>(j);
    for (int t = 0; t < T; ++t) {
      const auto tu = static_cast<std::size_t>(t);
      const Label a = est.answers[j][tu];
      const double dv = v(row, a) - v(row, a - 1);
      const double raw = 1.0 / K - dv / est.l;
      const double floor = t == 0 ? top_rank_floor(T) : kLowerRankFloor;
      est.q_hat_raw[j][tu] = raw;
      est.q_hat[j][tu] = est.degenerate ? floor : std::clamp(raw, floor, 1.0);
    }
    std::stable_sort(est.q_hat[j].begin(), est.q_hat[j].end(), std::greater<>());
  }
}

namespace {

TopTEstimate readout_top_t(SpectralProjections proj, int T) {
  TopTEstimate est;
  est.answers = read_top_t(proj.v, T);
  est.v = std::move(proj.v);
  est.unobserved = std::move(proj.unobserved);
  estimate_q_top_t(est, T);
  for (std::size_t j = 0; j < est.unobserved.size(); ++j) {
    if (!est.unobserved[j]) continue;
    est.answers[j] = first_labels(T);
    for (int t = 0; t < T; ++t) {
      est.q_hat[j][static_cast<std::size_t>(t)] = t == 0 ? top_rank_floor(T) : kLowerRankFloor;
    }
  }
  return est;
}

}  // namespace

TopTEstimate top_t1(const ResponseMatrix& responses, const SpectralConfig& cfg, int T) {
  check_rank(responses.choices(), T);
  return readout_top_t(spectral_projections(responses, cfg), T);
}

TopTEstimate top_t1_from_centered(const std::vector<Eigen::MatrixXd>& x_views,
                                  const std::vector<Eigen::MatrixXd>& y_views, double s_prime,
                                  const SpectralConfig& cfg, int T) {
  check_rank(static_cast<int>(x_views.size()) + 1, T);
  return readout_top_t(spectral_projections(x_views, y_views, s_prime, s_prime, cfg), T);
}

ReliabilityEstimate estimate_reliability_top_t_at_rate(
    const ResponseMatrix& held_out, const std::vector<std::vector<Label>>& answers,
    double effective_rate, int T) {
  const int K = held_out.choices();
  const int n = held_out.workers();
  const int m = held_out.tasks();
  check_rank(K, T);
  if (!(effective_rate > 0.0)) {
    throw std::invalid_argument("estimate_reliability_top_t: s (1 - s1) must be positive");
  }
  if (answers.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("estimate_reliability_top_t: answers do not match the task count");
  }

  ReliabilityEstimate out;
  out.effective_rate = effective_rate;
  out.p_hat.resize(static_cast<std::size_t>(n));
  out.p_hat_raw.resize(static_cast<std::size_t>(n));
  out.unobserved.assign(static_cast<std::size_t>(n), false);
  const double scale = static_cast<double>(K) / static_cast<double>(K - T);
  const double chance = static_cast<double>(T) / static_cast<double>(K);
  const double denom = static_cast<double>(m) * effective_rate;
  for (int i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    std::size_t hits = 0;
    std::size_t seen = 0;
    for (int j = 0; j < m; ++j) {
      const Label a = held_out.at(i, j);
      if (a == kUnobserved) continue;
      ++seen;
      const auto& top = answers[static_cast<std::size_t>(j)];
      if (std::find(top.begin(), top.end(), a) != top.end()) ++hits;
    }
    if (seen == 0) {
      out.unobserved[iu] = true;
      continue;
    }
    out.p_hat_raw[iu] = scale * (static_cast<double>(hits) / denom - chance);
    out.p_hat[iu] = clamp_reliability(out.p_hat_raw[iu]);
  }
  return out;
}

ReliabilityEstimate estimate_reliability_top_t(const ResponseMatrix& held_out,
                                               const std::vector<std::vector<Label>>& answers,
                                               double s, double s1, int T) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("estimate_reliability_top_t: s outside (0, 1]");
  if (!(s1 >= 0.0 && s1 < 1.0)) throw std::invalid_argument("estimate_reliability_top_t: s1 outside [0, 1)");
  return estimate_reliability_top_t_at_rate(held_out, answers, s * (1.0 - s1), T);
}

TopTPrediction plugin_mle_top_t(const ResponseMatrix& responses, const std::vector<double>& p_hat,
                                const std::vector<std::vector<double>>& q_hat, int T) {
  const int K = responses.choices();
  const int n = responses.workers();
  const int m = responses.tasks();
  check_rank(K, T);
  if (p_hat.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("plugin_mle_top_t: p_hat does not match the worker count");
  }
  if (q_hat.size() != static_cast<std::size_t>(m)) {
    throw std::invalid_argument("plugin_mle_top_t: q_hat does not match the task count");
  }
  for (const double p : p_hat) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("plugin_mle_top_t: p_hat must lie in [0, 1)");
  }
  for (const auto& row : q_hat) {
    if (row.size() != static_cast<std::size_t>(T)) {
      throw std::invalid_argument("plugin_mle_top_t: q_hat rows must have T entries");
    }
    for (const double q : row) {
      if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("plugin_mle_top_t: q_hat outside [0, 1]");
    }
  }

  TopTPrediction out;
  out.answers.resize(static_cast<std::size_t>(m));
  out.scores.resize(static_cast<std::size_t>(m));
  const auto slots = static_cast<std::size_t>(K) + 1;
  // weight[t][label]: summed log-weights of the responses equal to `label`
  // when it sits in rank t.
  std::vector<std::vector<double>> weight(static_cast<std::size_t>(T), std::vector<double>(slots));
  std::vector<Label> tuple(static_cast<std::size_t>(T));
  std::vector<bool> used(slots);
  for (int j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    for (auto& row : weight) std::fill(row.begin(), row.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      const Label a = responses.at(i, j);
      if (a == kUnobserved) continue;
      const double p = p_hat[static_cast<std::size_t>(i)];
      for (int t = 0; t < T; ++t) {
        const auto tu = static_cast<std::size_t>(t);
        weight[tu][static_cast<std::size_t>(a)] += mle_log_weight(K, p, q_hat[ju][tu]);
      }
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<Label> best_tuple;
    std::fill(used.begin(), used.end(), false);
    // Depth-first over distinct tuples in lexicographic order; a strict
    // improvement test keeps the smallest tuple among ties.
    std::function<void(int, double)> visit = [&](int depth, double partial) {
      if (depth == T) {
        if (partial > best) {
          best = partial;
          best_tuple = tuple;
        }
        return;
      }
      for (Label c = 1; c <= K; ++c) {
        if (used[static_cast<std::size_t>(c)]) continue;
        used[static_cast<std::size_t>(c)] = true;
        tuple[static_cast<std::size_t>(depth)] = c;
        visit(depth + 1, partial + weight[static_cast<std::size_t>(depth)][static_cast<std::size_t>(c)]);
        used[static_cast<std::size_t>(c)] = false;
      }
    };
    visit(0, 0.0);
    out.answers[ju] = std::move(best_tuple);
    out.scores[ju] = best;
  }
  return out;
}

std::vector<std::vector<double>> close_confusion_budget(
    const std::vector<std::vector<double>>& q_hat) {
  std::vector<std::vector<double>> out = q_hat;
  for (auto& row : out) {
    if (row.empty()) continue;
    double leading = 0.0;
    for (std::size_t t = 0; t + 1 < row.size(); ++t) leading += row[t];
    row.back() = std::max(0.0, 1.0 - leading);
  }
  return out;
}

TopT2Result top_t2(const ResponseMatrix& responses, std::optional<double> s, double s1,
                   const SpectralConfig& cfg, int T) {
  validate(cfg);
  check_rank(responses.choices(), T);
  if (!(s1 > 0.0 && s1 < 1.0)) throw std::invalid_argument("top_t2: s1 must lie in (0, 1)");
  if (s && !(*s > 0.0 && *s <= 1.0)) throw std::invalid_argument("top_t2: s outside (0, 1]");

  TopT2Result out;
  out.s_used = s ? *s : responses.density();
  auto [kept, held_out] = outer_split(responses, s1, derive_seed(cfg.seed, Stream::kOuterSplit));

  SpectralConfig stage1_cfg = cfg;
  if (s && !stage1_cfg.s_prime) stage1_cfg.s_prime = *s * s1 / 2.0;
  out.stage1 = top_t1(kept, stage1_cfg, T);

  std::vector<std::vector<Label>> plug = out.stage1.answers;
  if (out.stage1.degenerate) {
    plug = majority_rank(kept, T);
    out.fell_back_to_majority = true;
  }

  const double rate = s ? *s * (1.0 - s1) : held_out.density();
  if (!(rate > 0.0)) throw std::invalid_argument("top_t2: held-out half has no responses");
  out.reliability = estimate_reliability_top_t_at_rate(held_out, plug, rate, T);
  out.prediction = plugin_mle_top_t(responses, out.reliability.p_hat,
                                    close_confusion_budget(out.stage1.q_hat), T);
  return out;
}

}  // namespace toptwo
