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

#include "toptwo/metrics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace toptwo {

TopTwoPairs majority_vote_top_two(const ResponseMatrix& responses) {
  const int K = responses.choices();
  const int m = responses.tasks();
  TopTwoPairs out;
  out.g.resize(static_cast<std::size_t>(m));
  out.h.resize(static_cast<std::size_t>(m));
  std::vector<int> counts(static_cast<std::size_t>(K) + 1);
  for (int j = 0; j < m; ++j) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < responses.workers(); ++i) {
      ++counts[static_cast<std::size_t>(responses.at(i, j))];
    }
    // Zero-count labels rank below observed ones, smallest first.
    Label first = 1;
    for (Label c = 2; c <= K; ++c) {
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(first)]) first = c;
    }
    Label second = first == 1 ? 2 : 1;
    for (Label c = 1; c <= K; ++c) {
      if (c == first) continue;
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(second)]) second = c;
    }
    out.g[static_cast<std::size_t>(j)] = first;
    out.h[static_cast<std::size_t>(j)] = second;
  }
  return out;
}

EvalReport evaluate(const PredictionView& prediction, const ModelParams& truth) {
  const auto m = static_cast<std::size_t>(truth.m);
  if (prediction.g.size() != m || prediction.h.size() != m || truth.g.size() != m ||
      truth.h.size() != m) {
    throw std::invalid_argument("evaluate: predictions and truth disagree on the task count");
  }
  EvalReport report;
  std::size_t pair_miss = 0;
  std::size_t g_miss = 0;
  std::size_t h_miss = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const bool g_wrong = prediction.g[j] != truth.g[j];
    const bool h_wrong = prediction.h[j] != truth.h[j];
    g_miss += g_wrong ? 1 : 0;
    h_miss += h_wrong ? 1 : 0;
    pair_miss += (g_wrong || h_wrong) ? 1 : 0;
  }
  const double md = static_cast<double>(m);
  report.pair_error = static_cast<double>(pair_miss) / md;
  report.g_error = static_cast<double>(g_miss) / md;
  report.h_error = static_cast<double>(h_miss) / md;

  if (prediction.p_hat != nullptr) {
    const auto& p_hat = *prediction.p_hat;
    if (p_hat.size() != truth.p.size()) {
      throw std::invalid_argument("evaluate: p_hat and truth disagree on the worker count");
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < p_hat.size(); ++i) sq += (p_hat[i] - truth.p[i]) * (p_hat[i] - truth.p[i]);
    report.p_mse = sq / static_cast<double>(p_hat.size());
  }
  if (prediction.q_hat != nullptr) {
    const auto& q_hat = *prediction.q_hat;
    if (q_hat.size() != m || truth.q.size() != m) {
      throw std::invalid_argument("evaluate: q_hat and truth disagree on the task count");
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) sq += (q_hat[j] - truth.q[j]) * (q_hat[j] - truth.q[j]);
    report.q_mse = sq / md;
  }
  report.queries_per_task = static_cast<double>(truth.n) * truth.s;
  return report;
}

double ci95_half_width(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double count = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (count - 1.0));
  return 1.96 * sd / std::sqrt(count);
}

EvalReport aggregate(std::span<const EvalReport> per_seed) {
  if (per_seed.empty()) throw std::invalid_argument("aggregate: no reports");
  EvalReport out;
  const double count = static_cast<double>(per_seed.size());
  std::vector<double> pairs;
  double p_sum = 0.0;
  double q_sum = 0.0;
  bool has_p = true;
  bool has_q = true;
  for (const EvalReport& r : per_seed) {
    out.pair_error += r.pair_error;
    out.g_error += r.g_error;
    out.h_error += r.h_error;
    out.queries_per_task += r.queries_per_task;
    pairs.push_back(r.pair_error);
    has_p = has_p && r.p_mse.has_value();
    has_q = has_q && r.q_mse.has_value();
    p_sum += r.p_mse.value_or(0.0);
    q_sum += r.q_mse.value_or(0.0);
  }
  out.pair_error /= count;
  out.g_error /= count;
  out.h_error /= count;
  out.queries_per_task /= count;
  if (has_p) out.p_mse = p_sum / count;
  if (has_q) out.q_mse = q_sum / count;
  out.n_seeds = static_cast<int>(per_seed.size());
  out.ci_95 = ci95_half_width(pairs);
  return out;
}

std::string to_json(const EvalReport& report) {
  nlohmann::json j;
  j["pair_error"] = report.pair_error;
  j["g_error"] = report.g_error;
  j["h_error"] = report.h_error;
  j["p_mse"] = report.p_mse ? nlohmann::json(*report.p_mse) : nlohmann::json(nullptr);
  j["q_mse"] = report.q_mse ? nlohmann::json(*report.q_mse) : nlohmann::json(nullptr);
  j["n_seeds"] = report.n_seeds;
  j["ci_95"] = report.ci_95;
  j["queries_per_task"] = report.queries_per_task;
  return j.dump();
}

std::string csv_header() {
  return "pair_error,g_error,h_error,p_mse,q_mse,n_seeds,ci_95,queries_per_task";
}

std::string to_csv_row(const EvalReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << report.pair_error << ',' << report.g_error << ',' << report.h_error << ',';
  if (report.p_mse) os << *report.p_mse;
  os << ',';
  if (report.q_mse) os << *report.q_mse;
  os << ',' << report.n_seeds << ',' << report.ci_95 << ',' << report.queries_per_task;
  return os.str();
}

}  // namespace toptwo
