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

#include <Eigen/Dense>

#include "toptwo/response_matrix.hpp"

namespace toptwo {

// Lower clamp applied to spectral confusion estimates; keeps q-hat inside the
// model's open interval (1/2, 1].
inline constexpr double kConfusionFloor = 0.5 + 1e-9;

struct SpectralConfig {
  // Trimming parameter; entries of u above 2 / (eta sqrt(n)) are zeroed.
  double eta = 0.5;
  // Effective sampling probability of each half matrix (s * s1 / 2). When
  // empty, each half's observed density is used instead.
  std::optional<double> s_prime;
  // Power-iteration cap; 0 selects ceil(1000 * ln(max(m, 2))).
  int power_iters = 0;
  // Stop when successive iterates differ by less than this (~ their angle).
  double power_tol = 1e-10;
  std::uint64_t seed = 0;
};

void validate(const SpectralConfig& cfg);

struct SingularVector {
  Eigen::VectorXd u;
  int iterations = 0;
  bool converged = false;
};

// Leading left singular vector of X by power iteration, oriented so that it
// has no more negative than positive entries. Throws std::invalid_argument on
// an all-zero matrix; non-convergence is reported through `converged`.
SingularVector leading_left_singular_vector(const Eigen::MatrixXd& X, const SpectralConfig& cfg);

// Sign rule: more positive than negative entries; on a tie the entry sum must
// be positive, then the first nonzero entry.
void orient_majority_positive(Eigen::VectorXd& u);

Eigen::VectorXd trim(const Eigen::VectorXd& u, double eta, int n);

// v = Y^T u_trimmed / s_prime.
Eigen::VectorXd project(const Eigen::MatrixXd& Y, const Eigen::VectorXd& u_trimmed,
                        double s_prime);

// Each observed cell goes to exactly one half with probability 1/2.
std::pair<ResponseMatrix, ResponseMatrix> split_equal(const ResponseMatrix& responses,
                                                      std::uint64_t seed);

// Row j holds v_j^(0..K); columns 0 and K are zero.
using ProjectionStack = Eigen::MatrixXd;

struct TopTwoPairs {
  std::vector<Label> g;
  std::vector<Label> h;
};

// g = argmin_k dv^(k), h = argmin over k != g. Ties go to the smaller label.
TopTwoPairs read_top_two(const ProjectionStack& v);

struct ConfusionEstimate {
  std::vector<double> q_hat;      // clamped to [kConfusionFloor, 1]; all at the floor if degenerate
  std::vector<double> q_hat_raw;  // before clamping
  std::vector<double> l_per_task;
  double l = 0.0;
  bool degenerate = false;  // l <= 0 or no task contributed
};

// l_j = K/(K-2) * (sum of dv off the top two), l = mean l_j over tasks not
// flagged in `excluded`, q_j = 1/K - dv^(g_j) / l.
ConfusionEstimate estimate_q(const ProjectionStack& v, const std::vector<Label>& g_hat,
                             const std::vector<Label>& h_hat,
                             const std::vector<bool>& excluded = {});

// Output of the split / binarize / singular vector / projection pipeline,
// shared by the top-two and top-T readouts.
struct SpectralProjections {
  ProjectionStack v;
  std::vector<Eigen::VectorXd> u_trimmed;  // index k - 1
  std::vector<double> trimmed_norms;       // ||u_trimmed^(k)||_2
  std::vector<bool> converged;             // per threshold
  std::vector<bool> unobserved;            // per task, no response in the input
  double s_prime_x = 0.0;
  double s_prime_y = 0.0;
};

SpectralProjections spectral_projections(const std::vector<Eigen::MatrixXd>& x_views,
                                         const std::vector<Eigen::MatrixXd>& y_views,
                                         double s_prime_x, double s_prime_y,
                                         const SpectralConfig& cfg);

SpectralProjections spectral_projections(const ResponseMatrix& responses,
                                         const SpectralConfig& cfg);

struct SpectralEstimate {
  std::vector<Label> g_hat;
  std::vector<Label> h_hat;
  std::vector<double> q_hat;
  std::vector<double> q_hat_raw;
  ProjectionStack v;
  double l = 0.0;
  std::vector<Eigen::VectorXd> u_trimmed;
  std::vector<double> trimmed_norms;
  std::vector<bool> converged;
  std::vector<bool> unobserved;
  bool degenerate = false;
  double s_prime = 0.0;
};

// Spectral initial estimate of (g, h, q) from one response matrix.
SpectralEstimate toptwo1(const ResponseMatrix& responses, const SpectralConfig& cfg);

// Same readout fed with precomputed centered views (X for the singular vector,
// Y for the projection), one per threshold k = 1..K-1.
SpectralEstimate toptwo1_from_centered(const std::vector<Eigen::MatrixXd>& x_views,
                                       const std::vector<Eigen::MatrixXd>& y_views,
                                       double s_prime, const SpectralConfig& cfg);

}  // namespace toptwo
