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

#include "toptwo/binary_views.hpp"

#include <stdexcept>

namespace toptwo {

Eigen::MatrixXd binarize(const ResponseMatrix& responses, int k) {
  if (k < 1 || k >= responses.choices()) {
    throw std::invalid_argument("binarize: threshold must satisfy 1 <= k < K");
  }
  Eigen::MatrixXd out(responses.workers(), responses.tasks());
  for (int j = 0; j < responses.tasks(); ++j) {
    for (int i = 0; i < responses.workers(); ++i) {
      const Label a = responses.at(i, j);
      out(i, j) = a == kUnobserved ? 0.0 : (a <= k ? -1.0 : 1.0);
    }
  }
  return out;
}

double centering_shift(double s_eff, int K, int k) {
  return s_eff * static_cast<double>(K - 2 * k) / static_cast<double>(K);
}

Eigen::MatrixXd center(const Eigen::MatrixXd& raw, double s_eff, int K, int k) {
  if (!(s_eff > 0.0 && s_eff <= 1.0)) throw std::invalid_argument("center: s_eff outside (0, 1]");
  return (raw.array() - centering_shift(s_eff, K, k)).matrix();
}

Eigen::MatrixXd uncenter(const Eigen::MatrixXd& centered, double s_eff, int K, int k) {
  return (centered.array() + centering_shift(s_eff, K, k)).matrix();
}

BinaryView make_binary_view(const ResponseMatrix& responses, int k, double s_eff) {
  BinaryView view;
  view.k = k;
  view.s_eff = s_eff;
  view.raw = binarize(responses, k);
  view.centered = center(view.raw, s_eff, responses.choices(), k);
  return view;
}

double r_value(Label g, Label h, double q, int K, int k) {
  if (g == h) throw std::invalid_argument("r_value: g and h must differ");
  if (k < 0 || k > K) throw std::invalid_argument("r_value: k outside [0, K]");
  if (k == 0 || k == K) return 0.0;
  const double base = static_cast<double>(k) / static_cast<double>(K);
  if (g > h) {
    if (k < h) return base;
    if (k < g) return base - (1.0 - q);
    return base - 1.0;
  }
  if (k < g) return base;
  if (k < h) return base - q;
  return base - 1.0;
}

std::vector<double> delta_r(Label g, Label h, double q, int K) {
  if (g == h) throw std::invalid_argument("delta_r: g and h must differ");
  std::vector<double> out(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    out[static_cast<std::size_t>(k - 1)] = r_value(g, h, q, K, k) - r_value(g, h, q, K, k - 1);
  }
  return out;
}

}  // namespace toptwo
