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

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toptwo/io.hpp"
#include "toptwo/metrics.hpp"
#include "toptwo/model.hpp"
#include "toptwo/plugin_mle.hpp"
#include "toptwo/scenarios.hpp"
#include "toptwo/spectral.hpp"
#include "toptwo/sweep.hpp"
#include "toptwo/top_t.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toptwo;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string env_name(const std::string& flag) {
  std::string name = "TOPTWO_";
  for (const char c : flag) {
    if (c == '-') {
      if (name.back() != '_') name += '_';
      continue;
    }
    name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (name.back() == '_') name.pop_back();
  return name;
}

// Every flag can also be set through TOPTWO_<FLAG>.
template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
  return app->add_option(name, target, help)->envname(env_name(name));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

json vector_json(const std::vector<double>& v) { return json(v); }

struct ScenarioFlags {
  std::string scenario = "easy";
  std::string spec_path;
  int n = 0;
  int m = 0;
  int K = 0;
  int T = 0;
  std::uint64_t seed = 1;
};

void add_scenario_flags(CLI::App* app, ScenarioFlags& f) {
  flag(app, "--scenario", f.scenario, "Built-in scenario: easy, hard, few-smart, high-variance");
  flag(app, "--spec", f.spec_path, "Scenario JSON file (overrides --scenario)");
  flag(app, "--n", f.n, "Number of workers");
  flag(app, "--m", f.m, "Number of tasks");
  flag(app, "--k", f.K, "Number of choices K");
  flag(app, "--t", f.T, "Number of plausible answers T");
  flag(app, "--seed", f.seed, "Seed");
}

ScenarioSpec resolve_scenario(const ScenarioFlags& f) {
  ScenarioSpec spec;
  if (!f.spec_path.empty()) {
    std::ifstream in(f.spec_path);
    if (!in) throw std::runtime_error("cannot open " + f.spec_path);
    std::stringstream buf;
    buf << in.rdbuf();
    spec = spec_from_json(buf.str());
  } else {
    spec = builtin_scenario(f.scenario);
  }
  if (f.n > 0) spec.n = f.n;
  if (f.m > 0) spec.m = f.m;
  if (f.K > 0) spec.K = f.K;
  if (f.T > 0) spec.T = f.T;
  return spec;
}

struct Simulated {
  ResponseMatrix responses;
  TopTParams params;
};

Simulated simulate(const ScenarioSpec& spec, std::uint64_t seed, double s) {
  Simulated sim;
  sim.params = draw_top_t_params(spec, seed, s);
  sim.responses = sample_responses_top_t(sim.params, seed);
  return sim;
}

AnswerTable truth_table(const TopTParams& params) {
  AnswerTable table;
  table.T = params.T;
  table.answers = params.answers;
  table.q = params.q;
  return table;
}

ModelParams top_two_view(const TopTParams& params) {
  ModelParams out;
  out.n = params.n;
  out.m = params.m;
  out.K = params.K;
  out.s = params.s;
  out.p = params.p;
  for (int j = 0; j < params.m; ++j) {
    out.g.push_back(params.answers[static_cast<std::size_t>(j)][0]);
    out.h.push_back(params.answers[static_cast<std::size_t>(j)][1]);
    out.q.push_back(params.q[static_cast<std::size_t>(j)][0]);
  }
  return out;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateCmd {
  ScenarioFlags scenario;
  double s = 0.1;
  std::string out;
};

int run_simulate(const SimulateCmd& cmd) {
  ScenarioSpec spec = resolve_scenario(cmd.scenario);
  const Simulated sim = simulate(spec, cmd.scenario.seed, cmd.s);
  const fs::path dir = cmd.out;
  write_text(dir / "responses.csv", render([&](std::ostream& os) { write_responses_csv(sim.responses, os); }));
  write_text(dir / "truth.csv", render([&](std::ostream& os) { write_answers_csv(truth_table(sim.params), os); }));
  write_text(dir / "workers.csv", render([&](std::ostream& os) { write_workers_csv(sim.params.p, os); }));
  const json doc = {{"scenario", spec.name},
                    {"n", spec.n},
                    {"m", spec.m},
                    {"K", spec.K},
                    {"T", spec.T},
                    {"s", cmd.s},
                    {"seed", cmd.scenario.seed},
                    {"observed", sim.responses.observed_count()},
                    {"density", sim.responses.density()},
                    {"files", {"responses.csv", "truth.csv", "workers.csv"}}};
  std::cout << doc.dump(2) << "\n";
  return 0;
}

// ---- infer ------------------------------------------------------------------

struct InferCmd {
  ScenarioFlags scenario;
  std::string input;
  std::string truth;
  std::string workers;
  std::string algo = "toptwo2";
  std::optional<double> s;
  double s1 = 0.5;
  double eta = 0.5;
  std::string out;
  std::string format = "json";
};

struct Inference {
  AnswerTable predictions;
  std::optional<std::vector<double>> p_hat;
  json diagnostics = json::object();
};

json spectral_health(const SpectralEstimate& est) {
  json converged = json::array();
  for (const bool c : est.converged) converged.push_back(c);
  std::size_t unobserved = 0;
  for (const bool u : est.unobserved) unobserved += u ? 1 : 0;
  return {{"trimmed_norms", vector_json(est.trimmed_norms)},
          {"power_converged", converged},
          {"l", est.l},
          {"degenerate", est.degenerate},
          {"s_prime", est.s_prime},
          {"unobserved_tasks", unobserved}};
}

AnswerTable pair_table(const std::vector<Label>& g, const std::vector<Label>& h,
                       const std::vector<double>* q) {
  AnswerTable table;
  table.T = 2;
  for (std::size_t j = 0; j < g.size(); ++j) table.answers.push_back({g[j], h[j]});
  if (q != nullptr) {
    std::vector<std::vector<double>> rows;
    for (const double v : *q) rows.push_back({v, 1.0 - v});
    table.q = rows;
  }
  return table;
}

Inference infer(const ResponseMatrix& responses, const InferCmd& cmd, int T,
                const ModelParams* truth) {
  const Algorithm algo = parse_algorithm(cmd.algo);
  SpectralConfig cfg;
  cfg.eta = cmd.eta;
  cfg.seed = cmd.scenario.seed;
  Inference res;
  switch (algo) {
    case Algorithm::kMajorityVote: {
      const auto pairs = majority_vote_top_two(responses);
      res.predictions = pair_table(pairs.g, pairs.h, nullptr);
      break;
    }
    case Algorithm::kTopTwo1: {
      if (cmd.s) cfg.s_prime = *cmd.s / 2.0;
      const auto est = toptwo1(responses, cfg);
      res.predictions = pair_table(est.g_hat, est.h_hat, &est.q_hat);
      res.diagnostics["spectral"] = spectral_health(est);
      break;
    }
    case Algorithm::kTopTwo2: {
      const auto out = toptwo2(responses, cmd.s, cmd.s1, cfg);
      res.predictions = pair_table(out.prediction.g, out.prediction.h, &out.stage1.q_hat);
      res.p_hat = out.reliability.p_hat;
      res.diagnostics["spectral"] = spectral_health(out.stage1);
      res.diagnostics["fell_back_to_majority"] = out.fell_back_to_majority;
      res.diagnostics["s_used"] = out.s_used;
      break;
    }
    case Algorithm::kOracleMle: {
      if (truth == nullptr) throw UsageError("--algo oracle needs --truth and --workers");
      const auto pred = oracle_mle(responses, *truth);
      res.predictions = pair_table(pred.g, pred.h, &truth->q);
      break;
    }
    case Algorithm::kTopT: {
      const auto out = top_t2(responses, cmd.s, cmd.s1, cfg, T);
      res.predictions.T = T;
      res.predictions.answers = out.prediction.answers;
      res.predictions.q = out.stage1.q_hat;
      res.p_hat = out.reliability.p_hat;
      res.diagnostics["spectral"] = {{"l", out.stage1.l}, {"degenerate", out.stage1.degenerate}};
      res.diagnostics["fell_back_to_majority"] = out.fell_back_to_majority;
      res.diagnostics["s_used"] = out.s_used;
      break;
    }
  }
  return res;
}

json eval_json(const AnswerTable& pred, const std::optional<std::vector<double>>& p_hat,
               const ModelParams& truth, const std::vector<std::vector<Label>>* truth_ranks) {
  std::vector<Label> g;
  std::vector<Label> h;
  std::vector<double> q;
  for (const auto& row : pred.answers) {
    g.push_back(row[0]);
    h.push_back(row[1]);
  }
  if (pred.q) {
    for (const auto& row : *pred.q) q.push_back(row[0]);
  }
  const bool with_p = p_hat && !truth.p.empty();
  PredictionView view{g, h, with_p ? &*p_hat : nullptr, pred.q && !truth.q.empty() ? &q : nullptr};
  json doc = json::parse(to_json(evaluate(view, truth)));
  if (truth_ranks != nullptr && pred.T > 2) {
    std::size_t miss = 0;
    for (std::size_t j = 0; j < pred.answers.size(); ++j) {
      if (pred.answers[j] != (*truth_ranks)[j]) ++miss;
    }
    doc["ranked_error"] = static_cast<double>(miss) / static_cast<double>(pred.answers.size());
  }
  return doc;
}

int run_infer(const InferCmd& cmd) {
  std::optional<Simulated> sim;
  ResponseMatrix responses;
  std::optional<ModelParams> truth;
  std::optional<TopTParams> truth_t;
  int T = 2;
  std::optional<double> s_for_truth = cmd.s;

  if (cmd.input.empty()) {
    ScenarioSpec spec = resolve_scenario(cmd.scenario);
    if (!cmd.s) throw UsageError("inline simulation needs --s");
    sim = simulate(spec, cmd.scenario.seed, *cmd.s);
    responses = sim->responses;
    truth_t = sim->params;
    truth = top_two_view(sim->params);
    T = spec.T;
  } else {
    IngestOptions opts;
    if (cmd.scenario.K > 0) opts.choices = cmd.scenario.K;
    if (cmd.scenario.n > 0) opts.workers = cmd.scenario.n;
    if (cmd.scenario.m > 0) opts.tasks = cmd.scenario.m;
    responses = read_responses_csv(fs::path(cmd.input), opts).responses;
    T = cmd.scenario.T > 0 ? cmd.scenario.T : 2;
    if (!cmd.truth.empty()) {
      const AnswerTable table = read_answers_csv(fs::path(cmd.truth));
      std::vector<double> p = cmd.workers.empty() ? std::vector<double>{}
                                                  : read_workers_csv(fs::path(cmd.workers));
      if (!table.q || p.empty()) {
        if (parse_algorithm(cmd.algo) == Algorithm::kOracleMle) {
          throw UsageError("--algo oracle needs q in --truth and a --workers file");
        }
      }
      ModelParams params;
      params.n = responses.workers();
      params.m = static_cast<int>(table.answers.size());
      params.K = responses.choices();
      params.s = s_for_truth.value_or(responses.density());
      params.p = p;
      for (std::size_t j = 0; j < table.answers.size(); ++j) {
        params.g.push_back(table.answers[j][0]);
        params.h.push_back(table.answers[j][1]);
        if (table.q) params.q.push_back((*table.q)[j][0]);
      }
      if (params.m != responses.tasks()) throw UsageError("--truth has a different task count");
      if (!p.empty() && static_cast<int>(p.size()) != responses.workers()) {
        throw UsageError("--workers has a different worker count");
      }
      truth = params;
      if (table.T > 2) {
        TopTParams tp;
        tp.T = table.T;
        tp.answers = table.answers;
        truth_t = tp;
      }
    }
  }

  const Inference res = infer(responses, cmd, T, truth ? &*truth : nullptr);

  json diag = res.diagnostics;
  diag["algorithm"] = to_string(parse_algorithm(cmd.algo));
  diag["n"] = responses.workers();
  diag["m"] = responses.tasks();
  diag["K"] = responses.choices();
  diag["T"] = T;
  diag["observed"] = responses.observed_count();
  diag["estimated_density"] = responses.density();
  if (cmd.s) diag["s"] = *cmd.s;
  if (truth) {
    const bool full = T == 2 && !truth->p.empty() && truth->q.size() == static_cast<std::size_t>(truth->m);
    if (full) {
      diag["reference_norms"] = vector_json(reference_norms(*truth));
      diag["min_pairwise_kl"] = min_pairwise_kl_all(*truth);
      double norm_sq = 0.0;
      for (const double p : truth->p) norm_sq += p * p;
      diag["p_norm"] = std::sqrt(norm_sq);
    }
    diag["eval"] = eval_json(res.predictions, res.p_hat, *truth,
                             truth_t && T > 2 ? &truth_t->answers : nullptr);
  }

  const std::string pred_csv = render([&](std::ostream& os) { write_answers_csv(res.predictions, os); });
  if (!cmd.out.empty()) {
    const fs::path dir = cmd.out;
    write_text(dir / "predictions.csv", pred_csv);
    if (res.p_hat) write_text(dir / "p_hat.csv", render([&](std::ostream& os) { write_workers_csv(*res.p_hat, os); }));
    write_text(dir / "diagnostics.json", diag.dump(2) + "\n");
    if (sim) {
      write_text(dir / "truth.csv", render([&](std::ostream& os) { write_answers_csv(truth_table(sim->params), os); }));
      write_text(dir / "workers.csv", render([&](std::ostream& os) { write_workers_csv(sim->params.p, os); }));
    }
  }
  if (cmd.format == "csv") {
    std::cout << pred_csv;
  } else {
    std::cout << diag.dump(2) << "\n";
  }
  return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepCmd {
  ScenarioFlags scenario;
  int seeds = 0;
  std::vector<double> s_grid;
  std::vector<std::string> algos;
  std::optional<double> s1;
  std::optional<double> eta;
  int threads = 0;
  std::string out;
  std::string format = "json";
  bool seed_set = false;
};

int run_sweep_cmd(const SweepCmd& cmd) {
  ScenarioSpec spec = resolve_scenario(cmd.scenario);
  if (cmd.seeds > 0) spec.seeds = cmd.seeds;
  if (!cmd.s_grid.empty()) spec.s_grid = cmd.s_grid;
  if (!cmd.algos.empty()) {
    spec.algorithms.clear();
    for (const auto& a : cmd.algos) spec.algorithms.push_back(parse_algorithm(a));
  }
  if (cmd.s1) spec.s1 = *cmd.s1;
  if (cmd.eta) spec.eta = *cmd.eta;
  if (cmd.seed_set) spec.master_seed = cmd.scenario.seed;
  std::optional<fs::path> out;
  if (!cmd.out.empty()) out = fs::path(cmd.out);
  const SweepResult result = run_sweep(spec, out, cmd.threads);
  std::cout << (cmd.format == "csv" ? results_csv(result) : summary_json(result));
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalCmd {
  std::string pred;
  std::string truth;
  std::string workers;
  std::string p_hat;
  std::optional<double> s;
  std::string format = "json";
};

int run_eval(const EvalCmd& cmd) {
  const AnswerTable pred = read_answers_csv(fs::path(cmd.pred));
  const AnswerTable truth_tab = read_answers_csv(fs::path(cmd.truth));
  if (pred.answers.size() != truth_tab.answers.size()) {
    throw UsageError("predictions and truth have different task counts");
  }
  if (pred.T != truth_tab.T) throw UsageError("predictions and truth have different T");
  ModelParams truth;
  truth.m = static_cast<int>(truth_tab.answers.size());
  for (std::size_t j = 0; j < truth_tab.answers.size(); ++j) {
    truth.g.push_back(truth_tab.answers[j][0]);
    truth.h.push_back(truth_tab.answers[j][1]);
    if (truth_tab.q) truth.q.push_back((*truth_tab.q)[j][0]);
  }
  std::optional<std::vector<double>> p_hat;
  if (!cmd.workers.empty()) truth.p = read_workers_csv(fs::path(cmd.workers));
  if (!cmd.p_hat.empty()) {
    if (truth.p.empty()) throw UsageError("--p-hat needs --workers");
    p_hat = read_workers_csv(fs::path(cmd.p_hat));
  }
  truth.n = static_cast<int>(truth.p.size());
  truth.s = cmd.s.value_or(0.0);
  const json doc = eval_json(pred, p_hat, truth, &truth_tab.answers);
  if (cmd.format == "csv") {
    std::vector<Label> g;
    std::vector<Label> h;
    std::vector<double> q;
    for (const auto& row : pred.answers) {
      g.push_back(row[0]);
      h.push_back(row[1]);
    }
    if (pred.q) {
      for (const auto& row : *pred.q) q.push_back(row[0]);
    }
    PredictionView view{g, h, p_hat ? &*p_hat : nullptr, pred.q && !truth.q.empty() ? &q : nullptr};
    std::cout << csv_header() << "\n" << to_csv_row(evaluate(view, truth)) << "\n";
  } else {
    std::cout << doc.dump(2) << "\n";
  }
  return 0;
}

// ---- export-soft-labels -----------------------------------------------------

struct SoftCmd {
  std::string pred;
  int K = 0;
  std::string out;
};

int run_soft(const SoftCmd& cmd) {
  const AnswerTable pred = read_answers_csv(fs::path(cmd.pred));
  if (pred.T != 2) throw UsageError("soft labels need a top-two predictions file");
  if (!pred.q) throw UsageError("predictions file has no q column");
  int K = cmd.K;
  for (const auto& row : pred.answers) {
    for (const Label a : row) {
      if (cmd.K > 0 && a > cmd.K) throw UsageError("prediction label exceeds --k");
      if (cmd.K == 0) K = std::max(K, a);
    }
  }
  if (K < 3) throw UsageError("need K >= 3; pass --k");
  std::vector<Label> g;
  std::vector<Label> h;
  std::vector<double> q;
  for (std::size_t j = 0; j < pred.answers.size(); ++j) {
    g.push_back(pred.answers[j][0]);
    h.push_back(pred.answers[j][1]);
    const double qj = (*pred.q)[j][0];
    if (!(qj > 0.5 && qj <= 1.0)) throw UsageError("q must lie in (1/2, 1] on every row");
    q.push_back(qj);
  }
  const std::string text = render([&](std::ostream& os) { write_soft_labels_csv(g, h, q, K, os); });
  if (cmd.out.empty()) {
    std::cout << text;
  } else {
    write_text(cmd.out, text);
  }
  return 0;
}

void print_error(const std::string& kind, const std::string& message, std::optional<std::size_t> line = {}) {
  json doc = {{"error", kind}, {"message", message}};
  if (line && *line > 0) doc["line"] = *line;
  std::cerr << doc.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Top-two answer inference for crowdsourced labels"};
  app.require_subcommand(1);

  SimulateCmd sim;
  auto* sim_app = app.add_subcommand("simulate", "Draw parameters and responses from a scenario");
  add_scenario_flags(sim_app, sim.scenario);
  flag(sim_app, "--s", sim.s, "Sampling probability");
  flag(sim_app, "--out", sim.out, "Output directory")->required();

  InferCmd inf;
  auto* inf_app = app.add_subcommand("infer", "Estimate top answers from a response file or an inline simulation");
  add_scenario_flags(inf_app, inf.scenario);
  flag(inf_app, "--input", inf.input, "Responses CSV (worker_id,task_id,label)");
  flag(inf_app, "--truth", inf.truth, "Truth CSV for diagnostics and evaluation");
  flag(inf_app, "--workers", inf.workers, "Worker reliability CSV (worker_id,p)");
  flag(inf_app, "--algo", inf.algo, "mv, toptwo1, toptwo2, oracle or toptT");
  flag(inf_app, "--s", inf.s, "Sampling probability; estimated from density when omitted");
  flag(inf_app, "--s1", inf.s1, "Outer split rate");
  flag(inf_app, "--eta", inf.eta, "Trimming parameter");
  flag(inf_app, "--out", inf.out, "Output directory");
  flag(inf_app, "--format", inf.format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));

  SweepCmd sw;
  auto* sw_app = app.add_subcommand("sweep", "Run a scenario over an s grid and seeds");
  add_scenario_flags(sw_app, sw.scenario);
  flag(sw_app, "--seeds", sw.seeds, "Replicates per grid point");
  flag(sw_app, "--s-grid", sw.s_grid, "Sampling probabilities")->delimiter(',');
  flag(sw_app, "--algo", sw.algos, "Algorithms")->delimiter(',');
  flag(sw_app, "--s1", sw.s1, "Outer split rate");
  flag(sw_app, "--eta", sw.eta, "Trimming parameter");
  flag(sw_app, "--threads", sw.threads, "Worker threads (0 = hardware)");
  flag(sw_app, "--out", sw.out, "Output directory");
  flag(sw_app, "--format", sw.format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));

  EvalCmd ev;
  auto* ev_app = app.add_subcommand("eval", "Score a predictions file against truth");
  flag(ev_app, "--pred", ev.pred, "Predictions CSV")->required();
  flag(ev_app, "--truth", ev.truth, "Truth CSV")->required();
  flag(ev_app, "--workers", ev.workers, "True worker reliabilities");
  flag(ev_app, "--p-hat", ev.p_hat, "Estimated worker reliabilities");
  flag(ev_app, "--s", ev.s, "Sampling probability, for queries per task");
  flag(ev_app, "--format", ev.format, "Stdout format")->check(CLI::IsMember({"json", "csv"}));

  SoftCmd soft;
  auto* soft_app = app.add_subcommand("export-soft-labels", "Write top-two soft label vectors");
  flag(soft_app, "--pred", soft.pred, "Predictions CSV with a q column")->required();
  flag(soft_app, "--k", soft.K, "Number of choices K");
  flag(soft_app, "--out", soft.out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*sim_app) return run_simulate(sim);
    if (*inf_app) return run_infer(inf);
    if (*sw_app) {
      sw.seed_set = sw_app->count("--seed") > 0 || std::getenv("TOPTWO_SEED") != nullptr;
      return run_sweep_cmd(sw);
    }
    if (*ev_app) return run_eval(ev);
    if (*soft_app) return run_soft(soft);
  } catch (const UsageError& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const IoError& e) {
    print_error("io", e.what(), e.line());
    return 1;
  } catch (const std::invalid_argument& e) {
    print_error("invalid_argument", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
  return 0;
}
