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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "toptwo/metrics.hpp"
#include "toptwo/model.hpp"
#include "toptwo/response_matrix.hpp"
#include "toptwo/scenarios.hpp"

namespace toptwo {

// Labels and parameter estimates produced by one algorithm on one matrix.
struct AlgorithmOutput {
  std::vector<Label> g;
  std::vector<Label> h;
  std::optional<std::vector<double>> p_hat;
  std::optional<std::vector<double>> q_hat;
  bool fell_back_to_majority = false;
};

struct RunOptions {
  std::optional<double> s;  // unset: estimated from the observed density
  double s1 = 0.5;
  double eta = 0.5;
  int T = 2;
  std::uint64_t seed = 0;
};

// Runs one algorithm. The oracle needs `truth`; toptT reports its first two
// ranks as (g, h) and its first-rank confusion estimate as q_hat.
AlgorithmOutput run_algorithm(Algorithm algo, const ResponseMatrix& responses,
                              const RunOptions& options, const ModelParams* truth = nullptr);

struct SweepRecord {
  Algorithm algorithm = Algorithm::kMajorityVote;
  double s = 0.0;
  int seed_index = 0;
  std::uint64_t replicate_seed = 0;
  std::optional<EvalReport> report;
  std::string error;  // non-empty when the cell failed
};

struct SweepPoint {
  double s = 0.0;
  EvalReport report;  // aggregated over the successful seeds
  int failures = 0;
};

struct SweepCurve {
  Algorithm algorithm = Algorithm::kMajorityVote;
  std::vector<SweepPoint> points;  // one per grid value, in grid order
};

struct SweepResult {
  ScenarioSpec spec;
  std::string config_hash;
  std::vector<SweepRecord> records;  // ordered by (s, seed, algorithm)
  std::vector<SweepCurve> summary;   // in spec.algorithms order
  double wall_seconds = 0.0;
};

std::string spec_to_json(const ScenarioSpec& spec);
// Throws std::invalid_argument on malformed input.
ScenarioSpec spec_from_json(const std::string& text);

// FNV-1a 64 of the canonical spec JSON, as 16 hex digits.
std::string config_hash(const ScenarioSpec& spec);

// Seed of replicate `seed_index`; parameters are drawn once per replicate and
// the responses at different s are nested.
std::uint64_t replicate_seed(const ScenarioSpec& spec, int seed_index);

// Runs every (s, seed) cell on `threads` workers (0 picks the hardware count).
// When `out` is set, writes spec.json, results.csv, summary.json and
// run_info.json there; only run_info.json carries timing.
SweepResult run_sweep(const ScenarioSpec& spec,
                      const std::optional<std::filesystem::path>& out = std::nullopt,
                      int threads = 0);

std::string results_csv(const SweepResult& result);
std::string summary_json(const SweepResult& result);

}  // namespace toptwo
