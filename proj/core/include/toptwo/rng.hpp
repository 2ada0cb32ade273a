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

namespace toptwo {

// Every random decision in the library draws from a stream keyed by
// (seed, purpose, a, b). Cells of a matrix get their own stream, so results
// do not depend on iteration order or on how work is split across threads.
enum class Stream : std::uint64_t {
  kResponses = 1,
  kOuterSplit = 2,
  kInnerSplit = 3,
  kPowerStart = 4,
  kSubsample = 5,
  kWorkerParams = 6,
  kTaskParams = 7,
  kCellSeed = 8,
};

std::uint64_t mix64(std::uint64_t x);

// Derives a child seed; used to hand independent seeds to sub-stages.
std::uint64_t derive_seed(std::uint64_t seed, Stream purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0);

// SplitMix64 generator seeded from a derived key.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, Stream purpose, std::uint64_t a = 0, std::uint64_t b = 0)
      : state_(derive_seed(seed, purpose, a, b)) {}

  std::uint64_t next();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

}  // namespace toptwo
