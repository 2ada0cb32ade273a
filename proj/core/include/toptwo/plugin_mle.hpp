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
#include <utility>
#include <vector>

#include "toptwo/model.hpp"
#include "toptwo/response_matrix.hpp"
#include "toptwo/spectral.hpp"

namespace toptwo {

// Reliability estimates are clamped to [0, 1 - kReliabilityCeilingGap].
inline constexpr double kReliabilityCeilingGap = 1e-6;

double clamp_reliability(double p);

// Log-likelihood weight of one response that matches an answer with
// confusion probability q, for a worker of reliability p < 1.
double mle_log_weight(int K, double p, double q);

struct ReliabilityEstimate {
  std::vector<double> p_hat;      // clamped
  std::vector<double> p_hat_raw;  // before clamping
  std::vector<bool> unobserved;   // worker had no response in the held-out half
  double effective_rate = 0.0;    // s (1 - s1)
};

struct MlePrediction {
  std::vector<Label> g;
  std::vector<Label> h;
  std::vector<double> scores;  // best score per task
};

// Keeps each observed cell in the first matrix with probability s1.
std::pair<ResponseMatrix, ResponseMatrix> outer_split(const ResponseMatrix& responses, double s1,
                                                      std::uint64_t seed);

// p_i = K/(K-2) * (hits_i / (m s (1 - s1)) - 2/K) with hits_i the number of
// held-out responses of worker i that land on (g_j, h_j).
ReliabilityEstimate estimate_reliability(const ResponseMatrix& held_out,
                                         const std::vector<Label>& g_hat,
                                         const std::vector<Label>& h_hat, double s, double s1);

// Same estimator with an explicit normalizer s (1 - s1).
ReliabilityEstimate estimate_reliability_at_rate(const ResponseMatrix& held_out,
                                                 const std::vector<Label>& g_hat,
                                                 const std::vector<Label>& h_hat,
                                                 double effective_rate);

// Per task, the ordered pair (a, b), a != b, maximizing
//   sum_i log(K p_i q_j / (1 - p_i) + 1) [A_ij = a]
//       + log(K p_i (1 - q_j) / (1 - p_i) + 1) [A_ij = b].
// Ties go to the lexicographically smallest pair.
MlePrediction plugin_mle(const ResponseMatrix& responses, const std::vector<double>& p_hat,
                         const std::vector<double>& q_hat);

// plugin_mle with the true (p, q); p is clamped like an estimate.
MlePrediction oracle_mle(const ResponseMatrix& responses, const ModelParams& params);

struct TopTwo2Result {
  MlePrediction prediction;
  SpectralEstimate stage1;
  ReliabilityEstimate reliability;
  bool fell_back_to_majority = false;  // stage 1 returned a degenerate scale
  double s_used = 0.0;                 // sampling probability used by the estimators
};

// Two-stage pipeline: outer split, spectral estimate on the first part,
// reliabilities on the held-out part, plug-in MLE on everything. With s
// unset, the observed density of `responses` stands in for it.
TopTwo2Result toptwo2(const ResponseMatrix& responses, std::optional<double> s, double s1,
                      const SpectralConfig& cfg);

}  // namespace toptwo
