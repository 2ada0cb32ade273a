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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "toptwo/response_matrix.hpp"

namespace toptwo {

/// Parameters of the top-two response model.
///
/// Worker i answers task j with probability s. An assigned response equals the
/// ground truth g_j with probability p_i q_j + (1 - p_i)/K, the most confusing
/// answer h_j with probability p_i (1 - q_j) + (1 - p_i)/K, and any other label
/// with probability (1 - p_i)/K.
struct ModelParams {
  int n = 0;
  int m = 0;
  int K = 0;
  double s = 1.0;
  std::vector<double> p;  // worker reliability, each in [0, 1]
  std::vector<double> q;  // confusion probability, each in (1/2, 1]
  std::vector<Label> g;   // ground truth, 1-based
  std::vector<Label> h;   // most confusing answer, 1-based, != g
};

// Throws std::invalid_argument describing the first violated invariant.
void validate(const ModelParams& params);

/// Conditional-on-assignment distribution of one worker's label for one task
/// under a hypothesized top-two pair. probs[c - 1] is the mass on label c.
struct LabelDistribution {
  std::vector<double> probs;

  double operator()(Label label) const { return probs[static_cast<std::size_t>(label - 1)]; }
};

LabelDistribution label_distribution(double p, double q, Label a, Label b, int K);

// Unconditional distribution of one cell: index 0 is "not assigned",
// index c in [1, K] is label c. Sums to 1.
std::vector<double> branch_probabilities(double p, double q, double s, Label g, Label h, int K);

// Draws one cell given the assignment probability and the conditional label
// distribution from the stream keyed by (seed, i, j).
Label draw_cell(double s, std::span<const double> conditional, std::uint64_t seed, int worker,
                int task);

ResponseMatrix sample_responses(const ModelParams& params, std::uint64_t seed);

// 2 * s_eff * p * r^(k)^T, the exact mean of the centered binary view at k.
Eigen::MatrixXd expected_centered_matrix(const ModelParams& params, int k, double s_eff);

// Average over workers of KL(mu_(g_j,h_j) || mu_(a,b)), minimized over every
// ordered pair (a, b) != (g_j, h_j) with a != b. Natural log.
double min_pairwise_kl(const ModelParams& params, int task);

// Minimum of min_pairwise_kl over all tasks.
double min_pairwise_kl_all(const ModelParams& params);

// ||r^(k)||_2 for k = 1..K-1 (index k - 1). Reported, never enforced.
std::vector<double> reference_norms(const ModelParams& params);

}  // namespace toptwo
