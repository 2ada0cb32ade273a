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

#include "toptwo/response_matrix.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace toptwo {

ResponseMatrix::ResponseMatrix(int workers, int tasks, int choices)
    : n_(workers), m_(tasks), k_(choices) {
  if (workers <= 0 || tasks <= 0) {
    throw std::invalid_argument("response matrix needs at least one worker and one task");
  }
  if (choices < 2 || choices > 65535) {
    throw std::invalid_argument("number of choices out of range: " + std::to_string(choices));
  }
  labels_.assign(static_cast<std::size_t>(workers) * static_cast<std::size_t>(tasks),
                 kUnobserved);
}

void ResponseMatrix::set(int worker, int task, Label label) {
  if (worker < 0 || worker >= n_ || task < 0 || task >= m_) {
    throw std::out_of_range("cell (" + std::to_string(worker) + ", " + std::to_string(task) +
                            ") outside the response matrix");
  }
  if (label < 0 || label > k_) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(k_) + "]");
  }
  labels_[index(worker, task)] = static_cast<std::uint16_t>(label);
}

std::size_t ResponseMatrix::observed_count() const {
  return static_cast<std::size_t>(
      std::count_if(labels_.begin(), labels_.end(), [](auto l) { return l != kUnobserved; }));
}

std::size_t ResponseMatrix::observed_in_task(int task) const {
  std::size_t count = 0;
  for (int i = 0; i < n_; ++i) count += observed(i, task) ? 1 : 0;
  return count;
}

std::size_t ResponseMatrix::observed_by_worker(int worker) const {
  std::size_t count = 0;
  for (int j = 0; j < m_; ++j) count += observed(worker, j) ? 1 : 0;
  return count;
}

double ResponseMatrix::density() const {
  if (labels_.empty()) return 0.0;
  return static_cast<double>(observed_count()) / static_cast<double>(labels_.size());
}

std::vector<Response> ResponseMatrix::responses() const {
  std::vector<Response> out;
  out.reserve(observed_count());
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < m_; ++j) {
      if (const Label l = at(i, j); l != kUnobserved) out.push_back({i, j, l});
    }
  }
  return out;
}

}  // namespace toptwo
