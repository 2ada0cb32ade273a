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

#include "toptwo/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "toptwo/rng.hpp"

namespace toptwo {
namespace {

std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim_ws(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Reads non-blank lines, tracking 1-based line numbers.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (trim_ws(line).empty()) continue;
      fields = split(line);
      return true;
    }
    return false;
  }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return v;
}

int require_int(const std::string& s, std::size_t line, const std::string& what) {
  const auto v = parse_int(s);
  if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
    throw IoError(what + " '" + s + "' is not an integer", line);
  }
  return static_cast<int>(*v);
}

double require_double(const std::string& s, std::size_t line, const std::string& what) {
  const auto v = parse_double(s);
  if (!v) throw IoError(what + " '" + s + "' is not a number", line);
  return *v;
}

void expect_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                   std::size_t line) {
  if (got != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw IoError("expected header " + joined, line);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string(), 0);
  return in;
}

// Positive-integer ids map to themselves; anything else forces a sorted
// dense remap of every id in that column.
struct IdMap {
  std::vector<std::string> ids;
  std::vector<int> index_of_row;
  int size = 0;
};

IdMap build_ids(const std::vector<std::string>& raw, std::optional<int> hint) {
  IdMap map;
  bool numeric = true;
  long long max_id = 0;
  for (const auto& id : raw) {
    const auto v = parse_int(id);
    if (!v || *v <= 0) {
      numeric = false;
      break;
    }
    max_id = std::max(max_id, *v);
  }
  if (numeric) {
    map.size = static_cast<int>(std::max<long long>(max_id, hint.value_or(0)));
    map.ids.resize(static_cast<std::size_t>(map.size));
    for (int i = 0; i < map.size; ++i) map.ids[static_cast<std::size_t>(i)] = std::to_string(i + 1);
    for (const auto& id : raw) map.index_of_row.push_back(static_cast<int>(*parse_int(id)) - 1);
    return map;
  }
  std::set<std::string> unique(raw.begin(), raw.end());
  map.ids.assign(unique.begin(), unique.end());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < map.ids.size(); ++i) index[map.ids[i]] = static_cast<int>(i);
  map.size = static_cast<int>(map.ids.size());
  if (hint && *hint > map.size) map.size = *hint;
  for (const auto& id : raw) map.index_of_row.push_back(index.at(id));
  return map;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

IoError::IoError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

void write_responses_csv(const ResponseMatrix& responses, std::ostream& out) {
  out << "worker_id,task_id,label\n";
  for (const auto& r : responses.responses()) {
    out << r.worker + 1 << ',' << r.task + 1 << ',' << r.label << '\n';
  }
}

IngestResult read_responses_csv(std::istream& in, const IngestOptions& options) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw IoError("empty responses file", 0);
  expect_header(fields, {"worker_id", "task_id", "label"}, reader.line());

  std::vector<std::string> workers;
  std::vector<std::string> tasks;
  std::vector<int> labels;
  std::vector<std::size_t> lines;
  int max_label = 0;
  while (reader.next(fields)) {
    if (fields.size() != 3) throw IoError("expected 3 fields, got " + std::to_string(fields.size()), reader.line());
    if (fields[0].empty() || fields[1].empty()) throw IoError("empty id", reader.line());
    const int label = require_int(fields[2], reader.line(), "label");
    if (label <= 0) throw IoError("label must be positive, got " + fields[2], reader.line());
    if (options.choices && label > *options.choices) {
      throw IoError("label " + fields[2] + " exceeds K = " + std::to_string(*options.choices), reader.line());
    }
    max_label = std::max(max_label, label);
    workers.push_back(fields[0]);
    tasks.push_back(fields[1]);
    labels.push_back(label);
    lines.push_back(reader.line());
  }
  if (labels.empty() && !options.choices) throw IoError("no responses and no K given", 0);

  const int K = options.choices.value_or(max_label);
  if (K < 3) throw IoError("K must be at least 3, got " + std::to_string(K), 0);
  const IdMap wmap = build_ids(workers, options.workers);
  const IdMap tmap = build_ids(tasks, options.tasks);
  if (options.workers && wmap.size > *options.workers) {
    throw IoError("more workers than the given n = " + std::to_string(*options.workers), 0);
  }
  if (options.tasks && tmap.size > *options.tasks) {
    throw IoError("more tasks than the given m = " + std::to_string(*options.tasks), 0);
  }
  if (wmap.size == 0 || tmap.size == 0) throw IoError("no workers or tasks", 0);

  IngestResult result;
  result.responses = ResponseMatrix(wmap.size, tmap.size, K);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int i = wmap.index_of_row[r];
    const int j = tmap.index_of_row[r];
    if (result.responses.observed(i, j)) {
      throw IoError("duplicate response for worker " + workers[r] + ", task " + tasks[r], lines[r]);
    }
    result.responses.set(i, j, labels[r]);
  }
  result.worker_ids = wmap.ids;
  result.task_ids = tmap.ids;
  result.worker_ids.resize(static_cast<std::size_t>(wmap.size));
  result.task_ids.resize(static_cast<std::size_t>(tmap.size));
  return result;
}

IngestResult read_responses_csv(const std::filesystem::path& path, const IngestOptions& options) {
  auto in = open_input(path);
  return read_responses_csv(in, options);
}

void write_answers_csv(const AnswerTable& table, std::ostream& out) {
  const int T = table.T;
  out << "task_id";
  if (T == 2) {
    out << ",g,h";
    if (table.q) out << ",q";
  } else {
    for (int t = 1; t <= T; ++t) out << ",g_" << t;
    if (table.q) {
      for (int t = 1; t <= T; ++t) out << ",q_" << t;
    }
  }
  out << '\n';
  for (std::size_t j = 0; j < table.answers.size(); ++j) {
    out << j + 1;
    for (const Label a : table.answers[j]) out << ',' << a;
    if (table.q) {
      if (T == 2) {
        out << ',' << fmt((*table.q)[j][0]);
      } else {
        for (const double q : (*table.q)[j]) out << ',' << fmt(q);
      }
    }
    out << '\n';
  }
}

AnswerTable read_answers_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw IoError("empty answers file", 0);
  if (header.empty() || header[0] != "task_id") throw IoError("first column must be task_id", reader.line());

  AnswerTable table;
  bool with_q = false;
  if (header.size() >= 3 && header[1] == "g" && header[2] == "h") {
    table.T = 2;
    if (header.size() == 4 && header[3] == "q") {
      with_q = true;
    } else if (header.size() != 3) {
      throw IoError("expected header task_id,g,h[,q]", reader.line());
    }
  } else {
    int T = 0;
    while (static_cast<std::size_t>(T + 1) < header.size() && header[static_cast<std::size_t>(T + 1)] == "g_" + std::to_string(T + 1)) ++T;
    if (T < 2) throw IoError("expected header task_id,g,h[,q] or task_id,g_1..g_T[,q_1..q_T]", reader.line());
    table.T = T;
    if (header.size() == static_cast<std::size_t>(2 * T + 1)) {
      for (int t = 1; t <= T; ++t) {
        if (header[static_cast<std::size_t>(T + t)] != "q_" + std::to_string(t)) {
          throw IoError("expected column q_" + std::to_string(t), reader.line());
        }
      }
      with_q = true;
    } else if (header.size() != static_cast<std::size_t>(T + 1)) {
      throw IoError("unexpected columns after g_" + std::to_string(T), reader.line());
    }
  }

  const int T = table.T;
  const std::size_t q_cols = with_q ? (T == 2 ? 1 : static_cast<std::size_t>(T)) : 0;
  const std::size_t width = 1 + static_cast<std::size_t>(T) + q_cols;
  std::vector<std::vector<double>> qs;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() != width) {
      throw IoError("expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()), reader.line());
    }
    const int task = require_int(fields[0], reader.line(), "task_id");
    if (task != static_cast<int>(table.answers.size()) + 1) {
      throw IoError("task ids must be 1, 2, ... in order", reader.line());
    }
    std::vector<Label> ans;
    for (int t = 0; t < T; ++t) {
      const int a = require_int(fields[static_cast<std::size_t>(1 + t)], reader.line(), "label");
      if (a <= 0) throw IoError("labels must be positive", reader.line());
      if (std::find(ans.begin(), ans.end(), a) != ans.end()) throw IoError("answers must be distinct", reader.line());
      ans.push_back(a);
    }
    table.answers.push_back(std::move(ans));
    if (with_q) {
      std::vector<double> q;
      for (std::size_t c = 0; c < q_cols; ++c) {
        q.push_back(require_double(fields[1 + static_cast<std::size_t>(T) + c], reader.line(), "q"));
      }
      if (T == 2) q.push_back(1.0 - q[0]);
      qs.push_back(std::move(q));
    }
  }
  if (with_q) table.q = std::move(qs);
  return table;
}

AnswerTable read_answers_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_answers_csv(in);
}

void write_workers_csv(const std::vector<double>& p, std::ostream& out) {
  out << "worker_id,p\n";
  for (std::size_t i = 0; i < p.size(); ++i) out << i + 1 << ',' << fmt(p[i]) << '\n';
}

std::vector<double> read_workers_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw IoError("empty workers file", 0);
  expect_header(fields, {"worker_id", "p"}, reader.line());
  std::vector<double> p;
  while (reader.next(fields)) {
    if (fields.size() != 2) throw IoError("expected 2 fields", reader.line());
    const int id = require_int(fields[0], reader.line(), "worker_id");
    if (id != static_cast<int>(p.size()) + 1) throw IoError("worker ids must be 1, 2, ... in order", reader.line());
    p.push_back(require_double(fields[1], reader.line(), "p"));
  }
  return p;
}

std::vector<double> read_workers_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_workers_csv(in);
}

ModelParams params_from_tables(const AnswerTable& truth, const std::vector<double>& p, int K,
                               double s) {
  if (!truth.q) throw std::invalid_argument("truth table has no confusion column");
  ModelParams params;
  params.n = static_cast<int>(p.size());
  params.m = static_cast<int>(truth.answers.size());
  params.K = K;
  params.s = s;
  params.p = p;
  for (std::size_t j = 0; j < truth.answers.size(); ++j) {
    params.g.push_back(truth.answers[j][0]);
    params.h.push_back(truth.answers[j][1]);
    params.q.push_back((*truth.q)[j][0]);
  }
  validate(params);
  return params;
}

ResponseMatrix subsample(const ResponseMatrix& responses, double keep_prob, std::uint64_t seed) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw std::invalid_argument("keep_prob must lie in (0, 1]");
  }
  ResponseMatrix out = responses.empty_like();
  for (const auto& r : responses.responses()) {
    StreamRng rng(seed, Stream::kSubsample, static_cast<std::uint64_t>(r.worker),
                  static_cast<std::uint64_t>(r.task));
    if (rng.uniform() < keep_prob) out.set(r.worker, r.task, r.label);
  }
  return out;
}

std::vector<double> soft_label(Label g, Label h, double q, int K) {
  std::vector<double> row(static_cast<std::size_t>(K), 0.0);
  row[static_cast<std::size_t>(g - 1)] = q;
  row[static_cast<std::size_t>(h - 1)] = 1.0 - q;
  return row;
}

void write_soft_labels_csv(const std::vector<Label>& g, const std::vector<Label>& h,
                           const std::vector<double>& q, int K, std::ostream& out) {
  out << "task_id";
  for (int k = 1; k <= K; ++k) out << ",p_" << k;
  out << '\n';
  for (std::size_t j = 0; j < g.size(); ++j) {
    out << j + 1;
    for (const double v : soft_label(g[j], h[j], q[j], K)) out << ',' << fmt(v);
    out << '\n';
  }
}

}  // namespace toptwo
