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

#include "toptwo/sweep.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>
#include <json.hpp>

namespace toptwo {
namespace {

namespace fs = std::filesystem;

ScenarioSpec small_spec() {
  ScenarioSpec spec = builtin_scenario("easy");
  spec.n = 20;
  spec.m = 60;
  spec.seeds = 3;
  spec.s_grid = {0.1, 0.3};
  spec.algorithms = {Algorithm::kMajorityVote, Algorithm::kTopTwo1, Algorithm::kTopTwo2,
                     Algorithm::kOracleMle, Algorithm::kTopT};
  return spec;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TEST(SpecJson, RoundTrip) {
  const ScenarioSpec spec = builtin_scenario("high-variance");
  const ScenarioSpec back = spec_from_json(spec_to_json(spec));
  EXPECT_EQ(spec_to_json(back), spec_to_json(spec));
  EXPECT_EQ(config_hash(back), config_hash(spec));
  EXPECT_THROW(spec_from_json("{\"name\": 3"), std::invalid_argument);
}

TEST(ConfigHash, SensitiveToEveryField) {
  const ScenarioSpec base = small_spec();
  const std::string h = config_hash(base);
  EXPECT_EQ(h.size(), 16u);
  ScenarioSpec other = base;
  other.master_seed += 1;
  EXPECT_NE(config_hash(other), h);
  other = base;
  other.s_grid.push_back(0.5);
  EXPECT_NE(config_hash(other), h);
  other = base;
  other.q_law.components[0].range.lo = 0.91;
  EXPECT_NE(config_hash(other), h);
}

TEST(RunSweep, OneRecordPerCell) {
  const ScenarioSpec spec = small_spec();
  const SweepResult result = run_sweep(spec, std::nullopt, 2);
  EXPECT_EQ(result.records.size(), spec.s_grid.size() * spec.seeds * spec.algorithms.size());
  ASSERT_EQ(result.summary.size(), spec.algorithms.size());
  for (const auto& curve : result.summary) {
    ASSERT_EQ(curve.points.size(), spec.s_grid.size());
    for (const auto& pt : curve.points) {
      EXPECT_EQ(pt.failures, 0);
      EXPECT_EQ(pt.report.n_seeds, spec.seeds);
    }
  }
  for (const auto& rec : result.records) EXPECT_TRUE(rec.report.has_value()) << rec.error;
}

TEST(RunSweep, OutputsIndependentOfThreadCount) {
  const ScenarioSpec spec = small_spec();
  const fs::path root = fs::temp_directory_path() / "toptwo_sweep_test";
  fs::remove_all(root);
  const SweepResult a = run_sweep(spec, root / "one", 1);
  const SweepResult b = run_sweep(spec, root / "many", 3);
  for (const char* f : {"spec.json", "results.csv", "summary.json"}) {
    EXPECT_EQ(slurp(root / "one" / f), slurp(root / "many" / f)) << f;
  }
  const auto spec_doc = nlohmann::json::parse(slurp(root / "one" / "spec.json"));
  EXPECT_EQ(spec_doc.at("config_hash").get<std::string>(), config_hash(spec));
  EXPECT_TRUE(fs::exists(root / "one" / "run_info.json"));
  EXPECT_EQ(results_csv(a), results_csv(b));
  fs::remove_all(root);
}

TEST(RunSweep, RecordsCellFailuresAndContinues) {
  ScenarioSpec spec = small_spec();
  spec.K = 3;
  spec.T = 2;
  spec.algorithms = {Algorithm::kMajorityVote, Algorithm::kTopTwo1};
  spec.s_grid = {0.001};
  spec.n = 3;
  spec.m = 4;
  const SweepResult result = run_sweep(spec, std::nullopt, 1);
  int failed = 0;
  for (const auto& rec : result.records) {
    if (!rec.report) {
      ++failed;
      EXPECT_FALSE(rec.error.empty());
      EXPECT_EQ(rec.algorithm, Algorithm::kTopTwo1);
    }
  }
  EXPECT_GT(failed, 0);
  EXPECT_NE(results_csv(result).find("\"spectral stage"), std::string::npos);
}

TEST(RunSweep, OracleIsBestOnAverage) {
  ScenarioSpec spec = builtin_scenario("few-smart");
  spec.seeds = 10;
  spec.s_grid = {0.1, 0.2};
  const SweepResult result = run_sweep(spec);
  const SweepCurve* oracle = nullptr;
  for (const auto& c : result.summary) {
    if (c.algorithm == Algorithm::kOracleMle) oracle = &c;
  }
  ASSERT_NE(oracle, nullptr);
  for (const auto& c : result.summary) {
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      EXPECT_LE(oracle->points[k].report.pair_error, c.points[k].report.pair_error + 1e-12)
          << to_string(c.algorithm) << " at s=" << c.points[k].s;
    }
  }
}

TEST(RunAlgorithm, OracleNeedsTruth) {
  ResponseMatrix a(2, 2, 3);
  a.set(0, 0, 1);
  EXPECT_THROW(run_algorithm(Algorithm::kOracleMle, a, RunOptions{}), std::invalid_argument);
}

}  // namespace
}  // namespace toptwo
