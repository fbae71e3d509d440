// Copyright 2026 The stylematch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace stylematch {

/// Counter-based generator (Philox4x32-10).  Equal (seed, stream) pairs give
/// bit-identical draw sequences; split() derives an independent child stream,
/// so data generation, initialization and shuffling never interleave.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();
  uint32_t next_u32();
  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (second value cached).
  double gaussian();
  /// Uniform integer in [0, n), n > 0, unbiased.
  int64_t next_int(int64_t n);

  /// Independent child stream; deterministic in (seed, stream, label) and
  /// unaffected by how many draws the parent has made.
  Rng split(uint64_t label) const;

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      int64_t j = next_int(i + 1);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  void refill();

  uint64_t seed_ = 0;
  uint64_t stream_ = 0;
  uint64_t counter_ = 0;
  uint32_t block_[4] = {0, 0, 0, 0};
  int have_ = 0;  // unread u32 left in block_
  double cached_gauss_ = 0.0;
  bool has_cached_gauss_ = false;
};

}  // namespace stylematch
