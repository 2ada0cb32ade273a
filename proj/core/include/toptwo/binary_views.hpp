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

#include <vector>

#include <Eigen/Dense>

#include "toptwo/response_matrix.hpp"

namespace toptwo {

/// One thresholded view of a K-ary response matrix.
///
/// raw(i, j) is -1 when 1 <= A_ij <= k, +1 when k < A_ij <= K and 0 when the
/// cell is unobserved. centered subtracts s_eff (K - 2k) / K from every cell,
/// observed or not.
struct BinaryView {
  int k = 0;
  double s_eff = 0.0;
  Eigen::MatrixXd raw;
  Eigen::MatrixXd centered;
};

Eigen::MatrixXd binarize(const ResponseMatrix& responses, int k);

double centering_shift(double s_eff, int K, int k);

Eigen::MatrixXd center(const Eigen::MatrixXd& raw, double s_eff, int K, int k);

// Inverse of center().
Eigen::MatrixXd uncenter(const Eigen::MatrixXd& centered, double s_eff, int K, int k);

BinaryView make_binary_view(const ResponseMatrix& responses, int k, double s_eff);

// Reference value r^(k) for a task with top-two pair (g, h) and confusion
// probability q. Defined for 0 <= k <= K with r^(0) = r^(K) = 0.
double r_value(Label g, Label h, double q, int K, int k);

// delta[k - 1] = r^(k) - r^(k-1) for k = 1..K.
std::vector<double> delta_r(Label g, Label h, double q, int K);

}  // namespace toptwo
