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
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "toptwo/model.hpp"
#include "toptwo/response_matrix.hpp"

namespace toptwo {

// Parse or validation failure in a delimited file; `line` is 1-based, 0 when
// the problem is not tied to a line.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct IngestOptions {
  std::optional<int> workers;
  std::optional<int> tasks;
  std::optional<int> choices;
};

struct IngestResult {
  ResponseMatrix responses;
  // Original identifiers by row / column index.
  std::vector<std::string> worker_ids;
  std::vector<std::string> task_ids;
};

// worker_id,task_id,label with 1-based integer ids.
void write_responses_csv(const ResponseMatrix& responses, std::ostream& out);

// Header worker_id,task_id,label. When every id is a positive integer the id
// is taken as a 1-based index and the dimensions are the largest id seen (or
// the hint, if larger); otherwise ids are mapped densely in sorted order.
// K is the hint or the largest label. Duplicate (worker, task) pairs, label 0
// and labels above K are rejected.
IngestResult read_responses_csv(std::istream& in, const IngestOptions& options = {});
IngestResult read_responses_csv(const std::filesystem::path& path,
                                const IngestOptions& options = {});

// Ranked answers and confusion probabilities per task. Written as
// task_id,g,h,q for T = 2 and task_id,g_1..g_T,q_1..q_T otherwise; the
// confusion columns are optional on input.
struct AnswerTable {
  int T = 2;
  std::vector<std::vector<Label>> answers;
  std::optional<std::vector<std::vector<double>>> q;
};

void write_answers_csv(const AnswerTable& table, std::ostream& out);
AnswerTable read_answers_csv(std::istream& in);
AnswerTable read_answers_csv(const std::filesystem::path& path);

// worker_id,p
void write_workers_csv(const std::vector<double>& p, std::ostream& out);
std::vector<double> read_workers_csv(std::istream& in);
std::vector<double> read_workers_csv(const std::filesystem::path& path);

// Truth tables plus worker reliabilities as ModelParams (top-two rows only).
ModelParams params_from_tables(const AnswerTable& truth, const std::vector<double>& p, int K,
                               double s);

// Keeps each observed cell with probability keep_prob.
ResponseMatrix subsample(const ResponseMatrix& responses, double keep_prob, std::uint64_t seed);

// K-vector with q at g, 1 - q at h and 0 elsewhere.
std::vector<double> soft_label(Label g, Label h, double q, int K);

// task_id,p_1..p_K
void write_soft_labels_csv(const std::vector<Label>& g, const std::vector<Label>& h,
                           const std::vector<double>& q, int K, std::ostream& out);

}  // namespace toptwo
