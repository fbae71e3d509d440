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
#include <vector>

#include "doctest.h"
#include "stylematch/rng.hpp"
#include "stylematch/tensor.hpp"

using namespace stylematch;

namespace {

Tensor random_tensor(Rng& rng, std::vector<int64_t> shape, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Independent triple-loop product.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
  Tensor c({a.dim(0), b.dim(1)});
  for (int64_t i = 0; i < a.dim(0); ++i)
    for (int64_t j = 0; j < b.dim(1); ++j) {
      double acc = 0.0;
      for (int64_t p = 0; p < a.dim(1); ++p) acc += a.at(i, p) * b.at(p, j);
      c.at(i, j) = acc;
    }
  return c;
}

// Independent direct six-loop cross-correlation with explicit bounds checks.
Tensor conv2d_oracle(const Tensor& in, const Tensor& w, int64_t stride,
                     int64_t pad) {
  const int64_t cin = in.dim(0), h = in.dim(1), ww = in.dim(2);
  const int64_t cout = w.dim(0), k = w.dim(2);
  const int64_t oh = (h + 2 * pad - k) / stride + 1;
  const int64_t ow = (ww + 2 * pad - k) / stride + 1;
  Tensor out({cout, oh, ow});
  for (int64_t co = 0; co < cout; ++co)
    for (int64_t oy = 0; oy < oh; ++oy)
      for (int64_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (int64_t ci = 0; ci < cin; ++ci)
          for (int64_t ky = 0; ky < k; ++ky)
            for (int64_t kx = 0; kx < k; ++kx) {
              int64_t iy = oy * stride + ky - pad;
              int64_t ix = ox * stride + kx - pad;
              if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
              acc += in.at(ci, iy, ix) * w.at(co, ci, ky, kx);
            }
        out.at(co, oy, ox) = acc;
      }
  return out;
}

double rel_err(double got, double want) {
  double denom = std::max(std::abs(want), 1e-300);
  return std::abs(got - want) / denom;
}

}  // namespace

TEST_CASE("matmul: identity, hand case, triple-loop oracle") {
  Tensor eye({3, 3});
  for (int64_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  Rng rng(21);
  Tensor m = random_tensor(rng, {3, 3});
  Tensor prod = matmul(eye, m);
  for (int64_t i = 0; i < 9; ++i) CHECK(prod[i] == m[i]);

  Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from_values({2, 1}, {0, 1});
  Tensor ab = matmul(a, b);
  CHECK(ab.at(0, 0) == 2.0);
  CHECK(ab.at(1, 0) == 4.0);

  Tensor x = random_tensor(rng, {5, 4});
  Tensor y = random_tensor(rng, {4, 3});
  Tensor got = matmul(x, y);
  Tensor want = matmul_oracle(x, y);
  for (int64_t i = 0; i < got.numel(); ++i)
    CHECK(rel_err(got[i], want[i]) < 1e-12);

  CHECK_THROWS_AS(matmul(x, x), ShapeError);
}

TEST_CASE("conv2d: 1x1 identity kernel, impulse response, loop oracle") {
  Rng rng(22);
  Tensor in = random_tensor(rng, {2, 5, 5});
  Tensor k1({2, 2, 1, 1});
  k1.at(0, 0, 0, 0) = 1.0;
  k1.at(1, 1, 0, 0) = 1.0;
  Tensor same = conv2d(in, k1, 1, 0);
  for (int64_t i = 0; i < in.numel(); ++i) CHECK(same[i] == in[i]);

  // all-ones 3x3 kernel on a one-hot input, padding 1: 3x3 block of ones
  Tensor hot({1, 5, 5});
  hot.at(0, 2, 2) = 1.0;
  Tensor ones({1, 1, 3, 3}, 1.0);
  Tensor resp = conv2d(hot, ones, 1, 1);
  for (int64_t y = 0; y < 5; ++y)
    for (int64_t x = 0; x < 5; ++x) {
      double want = (std::abs(y - 2) <= 1 && std::abs(x - 2) <= 1) ? 1.0 : 0.0;
      CHECK(resp.at(0, y, x) == want);
    }

  for (auto [stride, pad] : std::vector<std::pair<int64_t, int64_t>>{
           {1, 0}, {1, 1}, {2, 1}, {2, 0}}) {
    const int64_t h = 9;  // (9 + 2p - 3) divisible by both strides
    Tensor input = random_tensor(rng, {3, h, h});
    Tensor w = random_tensor(rng, {4, 3, 3, 3});
    Tensor got = conv2d(input, w, stride, pad);
    Tensor want = conv2d_oracle(input, w, stride, pad);
    REQUIRE(got.shape() == want.shape());
    for (int64_t i = 0; i < got.numel(); ++i)
      CHECK(rel_err(got[i], want[i]) < 1e-12);
  }

  Tensor bad = random_tensor(rng, {1, 6, 6});
  Tensor w3 = random_tensor(rng, {1, 1, 3, 3});
  CHECK_THROWS_AS(conv2d(bad, w3, 2, 0), ShapeError);  // (6-3)%2 != 0
}

TEST_CASE("logsumexp: basics, overflow safety, shift invariance") {
  Tensor v = Tensor::from_values({2}, {0.0, 0.0});
  CHECK(logsumexp(v, 0)[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  Tensor big = Tensor::from_values({2}, {1000.0, 1000.0});
  CHECK(logsumexp(big, 0)[0] ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));

  Rng rng(23);
  Tensor r = random_tensor(rng, {7}, -3.0, 3.0);
  double naive = 0.0;
  for (double x : r.values()) naive += std::exp(x);
  CHECK(rel_err(logsumexp(r, 0)[0], std::log(naive)) < 1e-12);

  // lse(v + c) == lse(v) + c
  double c = 17.25;
  Tensor shifted = r;
  for (auto& x : shifted.values()) x += c;
  CHECK(std::abs(logsumexp(shifted, 0)[0] - (logsumexp(r, 0)[0] + c)) < 1e-12);

  // 2-d axes
  Tensor m = random_tensor(rng, {3, 4});
  Tensor rows = logsumexp(m, 1);
  for (int64_t i = 0; i < 3; ++i) {
    double acc = 0.0;
    for (int64_t j = 0; j < 4; ++j) acc += std::exp(m.at(i, j));
    CHECK(rel_err(rows[i], std::log(acc)) < 1e-12);
  }
  Tensor cols = logsumexp(m, 0);
  for (int64_t j = 0; j < 4; ++j) {
    double acc = 0.0;
    for (int64_t i = 0; i < 3; ++i) acc += std::exp(m.at(i, j));
    CHECK(rel_err(cols[j], std::log(acc)) < 1e-12);
  }

  Tensor empty({0});
  CHECK_THROWS_AS(logsumexp(empty, 0), ShapeError);
}

TEST_CASE("elementwise ops and finiteness policing") {
  Rng rng(24);
  Tensor a = random_tensor(rng, {5, 3});
  Tensor b = random_tensor(rng, {5, 3});
  Tensor s = add(a, b);
  for (int64_t i = 0; i < s.numel(); ++i) CHECK(s[i] == a[i] + b[i]);

  Tensor inf = a;
  inf[0] = 1e308;
  Tensor inf2 = inf;
  CHECK_THROWS_AS(add(inf, inf2), NumericError);

  CHECK_THROWS_AS(add(a, random_tensor(rng, {3, 5})), ShapeError);
  CHECK_THROWS_AS(Tensor::from_values({2, 2}, {1, 2, 3}), ShapeError);
}
