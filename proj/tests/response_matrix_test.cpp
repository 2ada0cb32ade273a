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

#include <stdexcept>

#include <gtest/gtest.h>

namespace toptwo {
namespace {

TEST(ResponseMatrix, StartsUnobserved) {
  ResponseMatrix a(3, 4, 5);
  EXPECT_EQ(a.workers(), 3);
  EXPECT_EQ(a.tasks(), 4);
  EXPECT_EQ(a.choices(), 5);
  EXPECT_EQ(a.observed_count(), 0u);
  EXPECT_DOUBLE_EQ(a.density(), 0.0);
}

TEST(ResponseMatrix, SetAndCount) {
  ResponseMatrix a(3, 4, 5);
  a.set(0, 1, 3);
  a.set(2, 1, 5);
  a.set(2, 3, 1);
  EXPECT_EQ(a.at(0, 1), 3);
  EXPECT_TRUE(a.observed(2, 3));
  EXPECT_FALSE(a.observed(1, 1));
  EXPECT_EQ(a.observed_count(), 3u);
  EXPECT_EQ(a.observed_in_task(1), 2u);
  EXPECT_EQ(a.observed_by_worker(2), 2u);
  EXPECT_DOUBLE_EQ(a.density(), 3.0 / 12.0);

  const auto rs = a.responses();
  ASSERT_EQ(rs.size(), 3u);
  EXPECT_EQ(rs[0].worker, 0);
  EXPECT_EQ(rs[1].task, 1);
  EXPECT_EQ(rs[2].label, 1);

  a.set(0, 1, kUnobserved);
  EXPECT_EQ(a.observed_count(), 2u);
}

TEST(ResponseMatrix, RejectsBadInput) {
  ResponseMatrix a(2, 2, 3);
  EXPECT_THROW(a.set(2, 0, 1), std::out_of_range);
  EXPECT_THROW(a.set(0, -1, 1), std::out_of_range);
  EXPECT_THROW(a.set(0, 0, 4), std::invalid_argument);
  EXPECT_THROW(a.set(0, 0, -1), std::invalid_argument);
  EXPECT_THROW(ResponseMatrix(0, 2, 3), std::invalid_argument);
}

TEST(ResponseMatrix, EqualityAndEmptyLike) {
  ResponseMatrix a(2, 3, 4);
  a.set(1, 2, 4);
  ResponseMatrix b = a.empty_like();
  EXPECT_NE(a, b);
  b.set(1, 2, 4);
  EXPECT_EQ(a, b);
}

}  // namespace
}  // namespace toptwo
