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

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "toptwo/plugin_mle.hpp"
#include "toptwo/rng.hpp"
#include "toptwo/spectral.hpp"
#include "toptwo/top_t.hpp"

namespace toptwo {
namespace {

using nlohmann::json;

json law_to_json(const MixtureLaw& law) {
  json out = json::array();
  for (const auto& c : law.components) {
    out.push_back({{"weight", c.weight},
                   {"lo", c.range.lo},
                   {"hi", c.range.hi},
                   {"lo_open", c.range.lo_open}});
  }
  return out;
}

MixtureLaw law_from_json(const json& j) {
  MixtureLaw law;
  for (const auto& c : j) {
    MixtureComponent comp;
    comp.weight = c.at("weight").get<double>();
    comp.range.lo = c.at("lo").get<double>();
    comp.range.hi = c.at("hi").get<double>();
    comp.range.lo_open = c.value("lo_open", false);
    law.components.push_back(comp);
  }
  return law;
}

json spec_json(const ScenarioSpec& spec) {
  json algos = json::array();
  for (const auto a : spec.algorithms) algos.push_back(to_string(a));
  return {{"name", spec.name},       {"n", spec.n},
          {"m", spec.m},             {"K", spec.K},
          {"T", spec.T},             {"s_grid", spec.s_grid},
          {"seeds", spec.seeds},     {"algorithms", algos},
          {"s1", spec.s1},           {"eta", spec.eta},
          {"master_seed", spec.master_seed},
          {"p_law", law_to_json(spec.p_law)},
          {"q_law", law_to_json(spec.q_law)}};
}

json report_json(const EvalReport& r) { return json::parse(to_json(r)); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

struct CellResult {
  std::vector<SweepRecord> records;
};

CellResult run_cell(const ScenarioSpec& spec, int seed_index, std::size_t s_index) {
  CellResult cell;
  const double s = spec.s_grid[s_index];
  const std::uint64_t rep = replicate_seed(spec, seed_index);
  ModelParams params;
  ResponseMatrix responses;
  std::string setup_error;
  try {
    params = draw_params(spec, rep, s);
    responses = sample_responses(params, rep);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  RunOptions options;
  options.s = s;
  options.s1 = spec.s1;
  options.eta = spec.eta;
  options.T = spec.T;
  options.seed = derive_seed(rep, Stream::kCellSeed, s_index);
  for (const auto algo : spec.algorithms) {
    SweepRecord record;
    record.algorithm = algo;
    record.s = s;
    record.seed_index = seed_index;
    record.replicate_seed = rep;
    if (!setup_error.empty()) {
      record.error = setup_error;
    } else {
      try {
        const AlgorithmOutput out = run_algorithm(algo, responses, options, &params);
        PredictionView view{out.g, out.h, out.p_hat ? &*out.p_hat : nullptr,
                            out.q_hat ? &*out.q_hat : nullptr};
        record.report = evaluate(view, params);
      } catch (const std::exception& e) {
        record.error = e.what();
      }
    }
    cell.records.push_back(std::move(record));
  }
  return cell;
}

std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string csv_escape(const std::string& text) {
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

AlgorithmOutput run_algorithm(Algorithm algo, const ResponseMatrix& responses,
                              const RunOptions& options, const ModelParams* truth) {
  SpectralConfig cfg;
  cfg.eta = options.eta;
  cfg.seed = options.seed;
  AlgorithmOutput out;
  switch (algo) {
    case Algorithm::kMajorityVote: {
      auto pairs = majority_vote_top_two(responses);
      out.g = std::move(pairs.g);
      out.h = std::move(pairs.h);
      break;
    }
    case Algorithm::kTopTwo1: {
      // Whole matrix; each half has density s / 2.
      if (options.s) cfg.s_prime = *options.s / 2.0;
      auto est = toptwo1(responses, cfg);
      out.g = std::move(est.g_hat);
      out.h = std::move(est.h_hat);
      out.q_hat = std::move(est.q_hat);
      out.fell_back_to_majority = false;
      break;
    }
    case Algorithm::kTopTwo2: {
      auto res = toptwo2(responses, options.s, options.s1, cfg);
      out.g = std::move(res.prediction.g);
      out.h = std::move(res.prediction.h);
      out.p_hat = std::move(res.reliability.p_hat);
      out.q_hat = std::move(res.stage1.q_hat);
      out.fell_back_to_majority = res.fell_back_to_majority;
      break;
    }
    case Algorithm::kOracleMle: {
      if (truth == nullptr) throw std::invalid_argument("the oracle needs ground-truth parameters");
      auto pred = oracle_mle(responses, *truth);
      out.g = std::move(pred.g);
      out.h = std::move(pred.h);
      break;
    }
    case Algorithm::kTopT: {
      auto res = top_t2(responses, options.s, options.s1, cfg, options.T);
      const auto m = res.prediction.answers.size();
      out.g.resize(m);
      out.h.resize(m);
      std::vector<double> q(m);
      for (std::size_t j = 0; j < m; ++j) {
        out.g[j] = res.prediction.answers[j][0];
        out.h[j] = res.prediction.answers[j][1];
        q[j] = res.stage1.q_hat[j][0];
      }
      out.p_hat = std::move(res.reliability.p_hat);
      out.q_hat = std::move(q);
      out.fell_back_to_majority = res.fell_back_to_majority;
      break;
    }
  }
  return out;
}

std::string spec_to_json(const ScenarioSpec& spec) { return spec_json(spec).dump(2); }

ScenarioSpec spec_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ScenarioSpec spec;
    spec.name = j.value("name", std::string("custom"));
    spec.n = j.value("n", spec.n);
    spec.m = j.value("m", spec.m);
    spec.K = j.value("K", spec.K);
    spec.T = j.value("T", spec.T);
    spec.s_grid = j.contains("s_grid") ? j.at("s_grid").get<std::vector<double>>() : default_s_grid();
    spec.seeds = j.value("seeds", spec.seeds);
    if (j.contains("algorithms")) {
      for (const auto& a : j.at("algorithms")) spec.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    spec.s1 = j.value("s1", spec.s1);
    spec.eta = j.value("eta", spec.eta);
    spec.master_seed = j.value("master_seed", spec.master_seed);
    spec.p_law = law_from_json(j.at("p_law"));
    spec.q_law = law_from_json(j.at("q_law"));
    return spec;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed scenario JSON: ") + e.what());
  }
}

std::string config_hash(const ScenarioSpec& spec) {
  const std::string canonical = spec_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t replicate_seed(const ScenarioSpec& spec, int seed_index) {
  return derive_seed(spec.master_seed, Stream::kCellSeed, static_cast<std::uint64_t>(seed_index));
}

SweepResult run_sweep(const ScenarioSpec& spec, const std::optional<std::filesystem::path>& out,
                      int threads) {
  validate(spec);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t grid = spec.s_grid.size();
  const std::size_t cells = grid * static_cast<std::size_t>(spec.seeds);
  std::vector<CellResult> results(cells);

  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  if (workers > cells) workers = static_cast<unsigned>(cells);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells; c = next++) {
          const std::size_t s_index = c / static_cast<std::size_t>(spec.seeds);
          const int seed_index = static_cast<int>(c % static_cast<std::size_t>(spec.seeds));
          results[c] = run_cell(spec, seed_index, s_index);
        }
      });
    }
  }

  SweepResult result;
  result.spec = spec;
  result.config_hash = config_hash(spec);
  for (auto& cell : results) {
    for (auto& r : cell.records) result.records.push_back(std::move(r));
  }
  for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
    SweepCurve curve;
    curve.algorithm = spec.algorithms[a];
    for (std::size_t si = 0; si < grid; ++si) {
      SweepPoint point;
      point.s = spec.s_grid[si];
      std::vector<EvalReport> ok;
      for (const auto& rec : result.records) {
        if (rec.algorithm != curve.algorithm || rec.s != point.s) continue;
        if (rec.report) {
          ok.push_back(*rec.report);
        } else {
          ++point.failures;
        }
      }
      if (!ok.empty()) point.report = aggregate(ok);
      point.report.n_seeds = static_cast<int>(ok.size());
      curve.points.push_back(point);
    }
    result.summary.push_back(std::move(curve));
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (out) {
    std::filesystem::create_directories(*out);
    json spec_doc = spec_json(spec);
    spec_doc["config_hash"] = result.config_hash;
    write_file(*out / "spec.json", spec_doc.dump(2) + "\n");
    write_file(*out / "results.csv", results_csv(result));
    write_file(*out / "summary.json", summary_json(result));
    const json info = {{"config_hash", result.config_hash},
                       {"wall_seconds", result.wall_seconds},
                       {"threads", workers}};
    write_file(*out / "run_info.json", info.dump(2) + "\n");
  }
  return result;
}

std::string results_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "scenario,algorithm,s,seed_index,replicate_seed," << csv_header() << ",error\n";
  const std::string empty_report = ",,,,,,,";
  for (const auto& rec : result.records) {
    os << result.spec.name << ',' << to_string(rec.algorithm) << ',' << format_double(rec.s) << ','
       << rec.seed_index << ',' << rec.replicate_seed << ',';
    os << (rec.report ? to_csv_row(*rec.report) : empty_report) << ',';
    if (!rec.error.empty()) os << csv_escape(rec.error);
    os << '\n';
  }
  return os.str();
}

std::string summary_json(const SweepResult& result) {
  json curves = json::object();
  for (const auto& curve : result.summary) {
    json points = json::array();
    for (const auto& pt : curve.points) {
      json p = report_json(pt.report);
      p["s"] = pt.s;
      p["failures"] = pt.failures;
      points.push_back(p);
    }
    curves[to_string(curve.algorithm)] = points;
  }
  const json doc = {{"scenario", result.spec.name},
                    {"config_hash", result.config_hash},
                    {"curves", curves}};
  return doc.dump(2) + "\n";
}

}  // namespace toptwo
