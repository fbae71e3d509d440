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

// Equivalence tests between the scalar reference kernels and whatever SIMD
// variant the dispatcher picked.  The variants are written to preserve the
// per-output-element accumulation order, so equality here is bit-exact.

#include <array>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "stylematch/kernels.hpp"
#include "stylematch/rng.hpp"

using namespace stylematch;
namespace k = stylematch::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double lo = -2.0,
                               double hi = 2.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool have_simd() { return k::active_level() != k::IsaLevel::Scalar; }

}  // namespace

TEST_CASE("dispatch reports a usable table") {
  CHECK(k::level_supported(k::IsaLevel::Scalar));
  CHECK(k::ops().add != nullptr);
  CHECK(k::scalar_ops().name == std::string("scalar"));
}

TEST_CASE("elementwise variants match scalar bit for bit") {
  if (!have_simd()) return;
  Rng rng(11);
  for (size_t n : {1u, 3u, 4u, 7u, 8u, 33u, 100u, 1023u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    std::vector<double> s(n), v(n);
    k::scalar_ops().add(a.data(), b.data(), s.data(), n);
    k::ops().add(a.data(), b.data(), v.data(), n);
    CHECK(bit_equal(s, v));
    k::scalar_ops().sub(a.data(), b.data(), s.data(), n);
    k::ops().sub(a.data(), b.data(), v.data(), n);
    CHECK(bit_equal(s, v));
    k::scalar_ops().mul(a.data(), b.data(), s.data(), n);
    k::ops().mul(a.data(), b.data(), v.data(), n);
    CHECK(bit_equal(s, v));
    k::scalar_ops().relu(a.data(), s.data(), n);
    k::ops().relu(a.data(), v.data(), n);
    CHECK(bit_equal(s, v));
    k::scalar_ops().relu_backward(a.data(), b.data(), s.data(), n);
    k::ops().relu_backward(a.data(), b.data(), v.data(), n);
    CHECK(bit_equal(s, v));

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    k::scalar_ops().axpy(0.37, a.data(), y1.data(), n);
    k::ops().axpy(0.37, a.data(), y2.data(), n);
    CHECK(bit_equal(y1, y2));
    k::scalar_ops().scale(-1.25, a.data(), s.data(), n);
    k::ops().scale(-1.25, a.data(), v.data(), n);
    CHECK(bit_equal(s, v));
  }
}

TEST_CASE("matmul variant matches scalar bit for bit") {
  if (!have_simd()) return;
  Rng rng(12);
  for (auto [n, kk, m] : std::vector<std::array<size_t, 3>>{
           {1, 1, 1}, {2, 3, 4}, {5, 7, 9}, {8, 16, 4}, {3, 64, 33}}) {
    auto a = random_vec(rng, n * kk), b = random_vec(rng, kk * m);
    std::vector<double> cs(n * m), cv(n * m);
    k::scalar_ops().matmul(a.data(), b.data(), cs.data(), n, kk, m, false);
    k::ops().matmul(a.data(), b.data(), cv.data(), n, kk, m, false);
    CHECK(bit_equal(cs, cv));
    // accumulate path
    auto seed = random_vec(rng, n * m);
    auto cs2 = seed, cv2 = seed;
    k::scalar_ops().matmul(a.data(), b.data(), cs2.data(), n, kk, m, true);
    k::ops().matmul(a.data(), b.data(), cv2.data(), n, kk, m, true);
    CHECK(bit_equal(cs2, cv2));
  }
}

TEST_CASE("pairwise_sqdist variant matches scalar bit for bit") {
  if (!have_simd()) return;
  Rng rng(13);
  for (auto [n, m, d] : std::vector<std::array<size_t, 3>>{
           {1, 1, 1}, {3, 5, 2}, {4, 4, 8}, {9, 6, 16}, {32, 33, 3}}) {
    auto p = random_vec(rng, n * d), q = random_vec(rng, m * d);
    std::vector<double> s(n * m), v(n * m);
    k::scalar_ops().pairwise_sqdist(p.data(), n, q.data(), m, d, s.data());
    k::ops().pairwise_sqdist(p.data(), n, q.data(), m, d, v.data());
    CHECK(bit_equal(s, v));
  }
}

TEST_CASE("conv2d_padded variant matches scalar bit for bit") {
  if (!have_simd()) return;
  Rng rng(14);
  struct Case {
    size_t cin, ph, pw, cout, k, stride;
  };
  for (const Case& c : {Case{1, 6, 6, 2, 3, 1}, Case{3, 10, 10, 4, 3, 1},
                        Case{2, 11, 11, 3, 3, 2}, Case{4, 9, 9, 2, 5, 2},
                        Case{2, 7, 9, 1, 3, 1}}) {
    size_t oh = (c.ph - c.k) / c.stride + 1, ow = (c.pw - c.k) / c.stride + 1;
    auto in = random_vec(rng, c.cin * c.ph * c.pw);
    auto w = random_vec(rng, c.cout * c.cin * c.k * c.k);
    std::vector<double> s(c.cout * oh * ow), v(c.cout * oh * ow);
    k::scalar_ops().conv2d_padded(in.data(), c.cin, c.ph, c.pw, w.data(),
                                  c.cout, c.k, c.stride, s.data(), oh, ow);
    k::ops().conv2d_padded(in.data(), c.cin, c.ph, c.pw, w.data(), c.cout, c.k,
                           c.stride, v.data(), oh, ow);
    CHECK(bit_equal(s, v));
  }
}

TEST_CASE("force_level round trip") {
  k::IsaLevel original = k::active_level();
  k::force_level(k::IsaLevel::Scalar);
  CHECK(k::active_level() == k::IsaLevel::Scalar);
  CHECK(k::ops().name == std::string("scalar"));
  k::force_level(original);
  CHECK(k::active_level() == original);
}
