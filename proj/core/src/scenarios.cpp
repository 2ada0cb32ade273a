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

#include "toptwo/scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "toptwo/rng.hpp"

namespace toptwo {
namespace {

std::string normalize_name(std::string name) {
  for (char& c : name) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '_' || c == ' ') c = '-';
  }
  return name;
}

void check_law(const MixtureLaw& law, double domain_lo, bool domain_lo_open, double domain_hi,
               const std::string& what) {
  if (law.components.empty()) throw std::invalid_argument(what + " law has no components");
  double total = 0.0;
  for (const auto& c : law.components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument(what + " law has a non-positive weight");
    total += c.weight;
    const auto& r = c.range;
    if (!(r.lo <= r.hi)) throw std::invalid_argument(what + " law has an inverted range");
    const bool lo_ok = domain_lo_open ? (r.lo > domain_lo || (r.lo == domain_lo && r.lo_open))
                                      : r.lo >= domain_lo;
    if (!lo_ok || r.hi > domain_hi) {
      throw std::invalid_argument(what + " law range leaves the parameter domain");
    }
    if (r.lo_open && r.lo == r.hi) throw std::invalid_argument(what + " law has an empty range");
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(what + " law weights must sum to 1");
}

}  // namespace

MixtureLaw MixtureLaw::uniform(double lo, double hi, bool lo_open) {
  return MixtureLaw{{MixtureComponent{1.0, UniformRange{lo, hi, lo_open}}}};
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kMajorityVote: return "mv";
    case Algorithm::kTopTwo1: return "toptwo1";
    case Algorithm::kTopTwo2: return "toptwo2";
    case Algorithm::kOracleMle: return "oracle";
    case Algorithm::kTopT: return "toptT";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  const std::string key = normalize_name(name);
  if (key == "mv") return Algorithm::kMajorityVote;
  if (key == "toptwo1") return Algorithm::kTopTwo1;
  if (key == "toptwo2") return Algorithm::kTopTwo2;
  if (key == "oracle" || key == "oracle-mle") return Algorithm::kOracleMle;
  if (key == "toptt" || key == "topt") return Algorithm::kTopT;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

void validate(const ScenarioSpec& spec) {
  if (spec.n <= 0 || spec.m <= 0) throw std::invalid_argument("scenario needs positive n and m");
  if (spec.K < 3) throw std::invalid_argument("scenario needs K >= 3");
  if (spec.seeds <= 0) throw std::invalid_argument("scenario needs at least one seed");
  if (spec.s_grid.empty()) throw std::invalid_argument("scenario s grid is empty");
  for (const double s : spec.s_grid) {
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("s grid values must lie in (0, 1]");
  }
  if (!(spec.s1 > 0.0 && spec.s1 < 1.0)) throw std::invalid_argument("s1 must lie in (0, 1)");
  if (!(spec.eta > 0.0 && spec.eta <= 1.0)) throw std::invalid_argument("eta must lie in (0, 1]");
  if (spec.T < 2 || spec.T >= spec.K) throw std::invalid_argument("T must satisfy 2 <= T < K");
  if (spec.algorithms.empty()) throw std::invalid_argument("scenario lists no algorithms");
  check_law(spec.p_law, 0.0, false, 1.0, "p");
  check_law(spec.q_law, 0.5, true, 1.0, "q");
}

std::vector<double> default_s_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.02 * i);
  return grid;
}

std::vector<ScenarioSpec> builtin_scenarios() {
  const std::vector<Algorithm> all = {Algorithm::kMajorityVote, Algorithm::kTopTwo1,
                                      Algorithm::kTopTwo2, Algorithm::kOracleMle};
  std::vector<ScenarioSpec> out;

  ScenarioSpec easy;
  easy.name = "easy";
  easy.p_law = MixtureLaw::uniform(0.0, 1.0);
  easy.q_law = MixtureLaw::uniform(0.9, 1.0);
  out.push_back(easy);

  ScenarioSpec hard;
  hard.name = "hard";
  hard.p_law = MixtureLaw::uniform(0.0, 1.0);
  hard.q_law = MixtureLaw::uniform(0.5, 0.6, true);
  out.push_back(hard);

  ScenarioSpec few_smart;
  few_smart.name = "few-smart";
  few_smart.p_law = MixtureLaw{{{0.9, {0.0, 0.1}}, {0.1, {0.9, 1.0}}}};
  few_smart.q_law = MixtureLaw::uniform(0.5, 1.0, true);
  out.push_back(few_smart);

  ScenarioSpec high_variance;
  high_variance.name = "high-variance";
  high_variance.p_law = MixtureLaw::uniform(0.0, 0.1);
  high_variance.q_law = MixtureLaw{{{0.5, {0.5, 0.6, true}}, {0.5, {0.9, 1.0}}}};
  out.push_back(high_variance);

  for (auto& spec : out) {
    spec.s_grid = default_s_grid();
    spec.algorithms = all;
  }
  return out;
}

ScenarioSpec builtin_scenario(const std::string& name) {
  const std::string key = normalize_name(name);
  for (auto& spec : builtin_scenarios()) {
    if (spec.name == key) return spec;
  }
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::vector<double> sample_mixture(const MixtureLaw& law, int count, std::uint64_t seed,
                                   std::uint64_t stream_id) {
  const std::size_t parts = law.components.size();
  std::vector<int> sizes(parts);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t c = 0; c < parts; ++c) {
    const double exact = law.components[c].weight * count;
    sizes[c] = static_cast<int>(std::floor(exact));
    assigned += sizes[c];
    remainders.emplace_back(exact - sizes[c], c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < count; ++r, ++assigned) ++sizes[remainders[r % parts].second];

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const Stream purpose = static_cast<Stream>(stream_id);
  for (std::size_t c = 0; c < parts; ++c) {
    const auto& range = law.components[c].range;
    for (int k = 0; k < sizes[c]; ++k) {
      StreamRng rng(seed, purpose, out.size());
      const double u = rng.uniform();
      // u in [0, 1): lo + width * u is [lo, hi), hi - width * u is (lo, hi].
      const double width = range.hi - range.lo;
      out.push_back(range.lo_open ? range.hi - width * u : range.lo + width * u);
    }
  }
  return out;
}

ModelParams draw_params(const ScenarioSpec& spec, std::uint64_t replicate_seed, double s) {
  ModelParams params;
  params.n = spec.n;
  params.m = spec.m;
  params.K = spec.K;
  params.s = s;
  params.p = sample_mixture(spec.p_law, spec.n, replicate_seed,
                            static_cast<std::uint64_t>(Stream::kWorkerParams));
  params.q = sample_mixture(spec.q_law, spec.m, replicate_seed,
                            static_cast<std::uint64_t>(Stream::kTaskParams));
  params.g.resize(static_cast<std::size_t>(spec.m));
  params.h.resize(static_cast<std::size_t>(spec.m));
  for (int j = 0; j < spec.m; ++j) {
    StreamRng rng(replicate_seed, Stream::kTaskParams, static_cast<std::uint64_t>(j), 1);
    const auto g = static_cast<Label>(rng.below(static_cast<std::uint64_t>(spec.K))) + 1;
    auto h = static_cast<Label>(rng.below(static_cast<std::uint64_t>(spec.K - 1))) + 1;
    if (h >= g) ++h;
    params.g[static_cast<std::size_t>(j)] = g;
    params.h[static_cast<std::size_t>(j)] = h;
  }
  validate(params);
  return params;
}

TopTParams draw_top_t_params(const ScenarioSpec& spec, std::uint64_t replicate_seed, double s) {
  const ModelParams base = draw_params(spec, replicate_seed, s);
  TopTParams params;
  params.n = base.n;
  params.m = base.m;
  params.K = base.K;
  params.T = spec.T;
  params.s = s;
  params.p = base.p;
  const auto T = static_cast<std::size_t>(spec.T);
  for (int j = 0; j < spec.m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    std::vector<Label> answers = {base.g[ju], base.h[ju]};
    std::vector<double> q = {base.q[ju], 1.0 - base.q[ju]};
    if (T > 2) {
      StreamRng rng(replicate_seed, Stream::kTaskParams, static_cast<std::uint64_t>(j), 2);
      std::vector<Label> rest;
      for (Label c = 1; c <= spec.K; ++c) {
        if (c != answers[0] && c != answers[1]) rest.push_back(c);
      }
      for (std::size_t t = 2; t < T; ++t) {
        const auto pick = static_cast<std::size_t>(rng.below(rest.size()));
        answers.push_back(rest[pick]);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      q.assign(T, 0.0);
      double total = 0.0;
      for (auto& w : q) {
        w = -std::log(1.0 - rng.uniform());
        total += w;
      }
      for (auto& w : q) w /= total;
      std::sort(q.begin(), q.end(), std::greater<>());
      double head = 0.0;
      for (std::size_t t = 1; t < T; ++t) head += q[t];
      q[0] = 1.0 - head;
    }
    params.answers.push_back(std::move(answers));
    params.q.push_back(std::move(q));
  }
  validate(params);
  return params;
}

}  // namespace toptwo
