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

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "stylematch/rng.hpp"

using stylematch::Rng;

TEST_CASE("equal seeds give bit-identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 10000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and streams diverge") {
  Rng a(1), b(2), c(1, 1);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++same_ab;
    if (va == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("split children are independent of parent draw position") {
  Rng parent(7);
  Rng child_before = parent.split(3);
  for (int i = 0; i < 100; ++i) parent.next_u64();
  Rng child_after = parent.split(3);
  for (int i = 0; i < 100; ++i)
    CHECK(child_before.next_u64() == child_after.next_u64());

  Rng other = parent.split(4);
  Rng three = parent.split(3);
  bool all_same = true;
  for (int i = 0; i < 16; ++i)
    if (three.next_u64() != other.next_u64()) all_same = false;
  CHECK_FALSE(all_same);
}

TEST_CASE("uniform doubles live in [0,1) and look uniform") {
  Rng rng(99);
  double acc = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double v = rng.next_double();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    acc += v;
  }
  CHECK(std::abs(acc / 20000.0 - 0.5) < 0.02);
}

TEST_CASE("gaussian moments") {
  Rng rng(5);
  double s = 0.0, s2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    s += g;
    s2 += g * g;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("next_int bounds and shuffle determinism") {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    int64_t v = rng.next_int(7);
    CHECK(v >= 0);
    CHECK(v < 7);
  }
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  auto v2 = v1;
  Rng r1(3), r2(3);
  r1.shuffle(v1);
  r2.shuffle(v2);
  CHECK(v1 == v2);
}
