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

#include "stylematch/rng.hpp"

#include <cmath>

#include "stylematch/errors.hpp"

namespace stylematch {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t ctr[4], uint32_t key[2]) {
  uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
  uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
  uint32_t c0 = static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
  uint32_t c1 = static_cast<uint32_t>(p1);
  uint32_t c2 = static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
  uint32_t c3 = static_cast<uint32_t>(p0);
  ctr[0] = c0;
  ctr[1] = c1;
  ctr[2] = c2;
  ctr[3] = c3;
  key[0] += kPhiloxW0;
  key[1] += kPhiloxW1;
}

// 10-round Philox4x32 of (counter, stream) under (seed) key.
void philox_block(uint64_t seed, uint64_t stream, uint64_t counter,
                  uint32_t out[4]) {
  uint32_t ctr[4] = {static_cast<uint32_t>(counter),
                     static_cast<uint32_t>(counter >> 32),
                     static_cast<uint32_t>(stream),
                     static_cast<uint32_t>(stream >> 32)};
  uint32_t key[2] = {static_cast<uint32_t>(seed),
                     static_cast<uint32_t>(seed >> 32)};
  for (int r = 0; r < 10; ++r) philox_round(ctr, key);
  out[0] = ctr[0];
  out[1] = ctr[1];
  out[2] = ctr[2];
  out[3] = ctr[3];
}

}  // namespace

Rng::Rng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

void Rng::refill() {
  philox_block(seed_, stream_, counter_, block_);
  ++counter_;
  have_ = 4;
}

uint32_t Rng::next_u32() {
  if (have_ == 0) refill();
  return block_[4 - have_--];
}

uint64_t Rng::next_u64() {
  uint64_t hi = next_u32();
  uint64_t lo = next_u32();
  return (hi << 32) | lo;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double Rng::gaussian() {
  if (has_cached_gauss_) {
    has_cached_gauss_ = false;
    return cached_gauss_;
  }
  // u1 in (0,1] keeps the log finite.
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * 3.14159265358979323846 * u2;
  cached_gauss_ = r * std::sin(theta);
  has_cached_gauss_ = true;
  return r * std::cos(theta);
}

int64_t Rng::next_int(int64_t n) {
  if (n <= 0) throw ConfigError("Rng::next_int: n must be positive");
  uint64_t un = static_cast<uint64_t>(n);
  uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<int64_t>(v % un);
}

Rng Rng::split(uint64_t label) const {
  // Child identity derived by one Philox block over (stream, label); the
  // parent's draw position is irrelevant.
  uint32_t out[4];
  philox_block(seed_ ^ 0xA02BDBF7BB3C0A7ULL, stream_, label, out);
  uint64_t childStream =
      (static_cast<uint64_t>(out[0]) << 32) | out[1];
  uint64_t childSeed = seed_ ^ ((static_cast<uint64_t>(out[2]) << 32) | out[3]);
  return Rng(childSeed, childStream);
}

}  // namespace stylematch
