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

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "toptwo/plugin_mle.hpp"
#include "toptwo/response_matrix.hpp"
#include "toptwo/spectral.hpp"

namespace toptwo {

/// Top-T response model: each task has T distinct plausible answers. An
/// assigned response equals answers[j][t] with probability
/// p_i q[j][t] + (1 - p_i)/K and any other label with probability
/// p_i (1 - sum_t q[j][t]) + (1 - p_i)/K. Only parameter sets whose branch
/// probabilities add up to one are accepted, which forces sum_t q[j][t] = 1
/// unless K = T + 1.
struct TopTParams {
  int n = 0;
  int m = 0;
  int K = 0;
  int T = 2;
  double s = 1.0;
  std::vector<double> p;
  std::vector<std::vector<Label>> answers;  // m rows of T labels, ranked
  std::vector<std::vector<double>> q;       // m rows of T probabilities, descending
};

void validate(const TopTParams& params);

// Conditional-on-assignment label distribution for one (worker, task).
std::vector<double> top_t_label_distribution(const TopTParams& params, int worker, int task);

ResponseMatrix sample_responses_top_t(const TopTParams& params, std::uint64_t seed);

// Exact mean of the centered binary view at threshold k: 2 s_eff p r^(k)^T
// with r_j^(k) = k/K - (reliable mass on labels <= k).
Eigen::MatrixXd expected_centered_matrix_top_t(const TopTParams& params, int k, double s_eff);

struct TopTEstimate {
  std::vector<std::vector<Label>> answers;  // m x T, ranked
  std::vector<std::vector<double>> q_hat;   // m x T, clamped and descending
  std::vector<std::vector<double>> q_hat_raw;
  double l = 0.0;
  ProjectionStack v;
  std::vector<bool> unobserved;
  bool degenerate = false;
};

// T labels with the smallest dv, in ascending order; ties to smaller labels.
std::vector<std::vector<Label>> read_top_t(const ProjectionStack& v, int T);

// l_j = K/(K-T) * (sum of dv off the top T), q_jt = 1/K - dv^(answer_jt) / l.
// q_j1 is clamped to [1/T + 1e-9, 1], later ranks to [1e-9, 1]; each row is
// then sorted in descending order.
void estimate_q_top_t(TopTEstimate& estimate, int T);

TopTEstimate top_t1(const ResponseMatrix& responses, const SpectralConfig& cfg, int T);

TopTEstimate top_t1_from_centered(const std::vector<Eigen::MatrixXd>& x_views,
                                  const std::vector<Eigen::MatrixXd>& y_views, double s_prime,
                                  const SpectralConfig& cfg, int T);

ReliabilityEstimate estimate_reliability_top_t(const ResponseMatrix& held_out,
                                               const std::vector<std::vector<Label>>& answers,
                                               double s, double s1, int T);

ReliabilityEstimate estimate_reliability_top_t_at_rate(
    const ResponseMatrix& held_out, const std::vector<std::vector<Label>>& answers,
    double effective_rate, int T);

struct TopTPrediction {
  std::vector<std::vector<Label>> answers;
  std::vector<double> scores;
};

// Per task, the tuple of distinct labels (a_1..a_T) maximizing
//   sum_i sum_t log(K p_i q_jt / (1 - p_i) + 1) [A_ij = a_t].
// Exact search over all K!/(K-T)! tuples in lexicographic order; ties go to
// the lexicographically smallest tuple.
TopTPrediction plugin_mle_top_t(const ResponseMatrix& responses, const std::vector<double>& p_hat,
                                const std::vector<std::vector<double>>& q_hat, int T);

// Confusion probabilities handed to the MLE: the spectral estimates for the
// first T-1 ranks and 1 - (their sum) for the last, floored at zero.
std::vector<std::vector<double>> close_confusion_budget(
    const std::vector<std::vector<double>>& q_hat);

struct TopT2Result {
  TopTPrediction prediction;
  TopTEstimate stage1;
  ReliabilityEstimate reliability;
  bool fell_back_to_majority = false;
  double s_used = 0.0;
};

TopT2Result top_t2(const ResponseMatrix& responses, std::optional<double> s, double s1,
                   const SpectralConfig& cfg, int T);

}  // namespace toptwo
