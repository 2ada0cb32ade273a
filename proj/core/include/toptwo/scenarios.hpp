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
#include <string>
#include <vector>

#include "toptwo/model.hpp"
#include "toptwo/top_t.hpp"

namespace toptwo {

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
  bool lo_open = false;  // (lo, hi] instead of [lo, hi]
};

struct MixtureComponent {
  double weight = 1.0;
  UniformRange range;
};

// Mixture of uniform ranges. Draws are stratified: a population of size N gets
// exactly round(weight * N) members per component (largest remainder), in
// component order, each drawn uniformly from its range.
struct MixtureLaw {
  std::vector<MixtureComponent> components;

  static MixtureLaw uniform(double lo, double hi, bool lo_open = false);
};

enum class Algorithm { kMajorityVote, kTopTwo1, kTopTwo2, kOracleMle, kTopT };

std::string to_string(Algorithm algo);
// Accepts mv, toptwo1, toptwo2, oracle, toptT. Throws std::invalid_argument.
Algorithm parse_algorithm(const std::string& name);

struct ScenarioSpec {
  std::string name;
  MixtureLaw p_law;
  MixtureLaw q_law;
  int n = 50;
  int m = 500;
  int K = 5;
  std::vector<double> s_grid;
  int seeds = 30;
  std::vector<Algorithm> algorithms;
  double s1 = 0.5;
  double eta = 0.5;
  int T = 2;
  std::uint64_t master_seed = 20260101;
};

// Throws std::invalid_argument on weights that do not sum to one, ranges
// outside the parameter domains, or an unusable grid.
void validate(const ScenarioSpec& spec);

// Default grid 0.02, 0.04, ..., 0.2.
std::vector<double> default_s_grid();

// Easy, Hard, Few-smart and High-variance at n = 50, m = 500, K = 5.
std::vector<ScenarioSpec> builtin_scenarios();

// Lookup by name, case-insensitive, accepting "few-smart" / "few_smart".
ScenarioSpec builtin_scenario(const std::string& name);

std::vector<double> sample_mixture(const MixtureLaw& law, int count, std::uint64_t seed,
                                   std::uint64_t stream_id);

// Draws (p, q, g, h) for one replicate; s is set by the caller.
ModelParams draw_params(const ScenarioSpec& spec, std::uint64_t replicate_seed, double s);

// Top-T draw. For T = 2 this is draw_params in top-T form. For T > 2 the
// first two answers match draw_params, the rest are uniform over the unused
// labels, and the confusion row is a flat Dirichlet draw sorted descending;
// q_law is not used.
TopTParams draw_top_t_params(const ScenarioSpec& spec, std::uint64_t replicate_seed, double s);

}  // namespace toptwo
