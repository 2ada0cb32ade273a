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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "toptwo/model.hpp"
#include "toptwo/response_matrix.hpp"
#include "toptwo/spectral.hpp"

namespace toptwo {

// Most and second most frequent label per task, ties to the smaller label.
// Tasks with fewer than two distinct labels fill the open slots with the
// smallest unused labels.
TopTwoPairs majority_vote_top_two(const ResponseMatrix& responses);

struct EvalReport {
  double pair_error = 0.0;
  double g_error = 0.0;
  double h_error = 0.0;
  std::optional<double> p_mse;
  std::optional<double> q_mse;
  int n_seeds = 1;
  double ci_95 = 0.0;  // half-width for pair_error across seeds
  double queries_per_task = 0.0;
};

struct PredictionView {
  const std::vector<Label>& g;
  const std::vector<Label>& h;
  const std::vector<double>* p_hat = nullptr;
  const std::vector<double>* q_hat = nullptr;
};

// queries_per_task is n * s from the truth. Throws std::invalid_argument on
// dimension mismatch.
EvalReport evaluate(const PredictionView& prediction, const ModelParams& truth);

// Half-width 1.96 * sd / sqrt(count) of the normal-approximation 95%
// interval; zero for fewer than two values.
double ci95_half_width(std::span<const double> values);

// Mean of per-seed reports; ci_95 is computed from the pair errors.
EvalReport aggregate(std::span<const EvalReport> per_seed);

std::string to_json(const EvalReport& report);
std::string csv_header();
std::string to_csv_row(const EvalReport& report);

}  // namespace toptwo
