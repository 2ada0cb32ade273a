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

#include <cstddef>
#include <cstdint>
#include <vector>

namespace toptwo {

// Labels are 1-based in [K]; 0 marks a (worker, task) cell with no response.
using Label = int;
inline constexpr Label kUnobserved = 0;

struct Response {
  int worker;
  int task;
  Label label;
};

// Dense n x m matrix of labels in {0, 1, ..., K}. Workers index rows and
// tasks index columns; both are 0-based in code.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  ResponseMatrix(int workers, int tasks, int choices);

  int workers() const { return n_; }
  int tasks() const { return m_; }
  int choices() const { return k_; }

  Label at(int worker, int task) const {
    return labels_[index(worker, task)];
  }
  // Throws std::out_of_range / std::invalid_argument on bad indices or label.
  void set(int worker, int task, Label label);

  bool observed(int worker, int task) const { return at(worker, task) != kUnobserved; }
  std::size_t observed_count() const;
  std::size_t observed_in_task(int task) const;
  std::size_t observed_by_worker(int worker) const;

  // Observed fraction of all n*m cells.
  double density() const;

  // Observed cells in row-major (worker, task) order.
  std::vector<Response> responses() const;

  // Same shape with every cell unobserved.
  ResponseMatrix empty_like() const { return ResponseMatrix(n_, m_, k_); }

  bool operator==(const ResponseMatrix& other) const = default;

 private:
  std::size_t index(int worker, int task) const {
    return static_cast<std::size_t>(worker) * static_cast<std::size_t>(m_) +
           static_cast<std::size_t>(task);
  }

  int n_ = 0;
  int m_ = 0;
  int k_ = 0;
  std::vector<std::uint16_t> labels_;
};

}  // namespace toptwo
