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
#include "stylematch/style.hpp"

using namespace stylematch;
using namespace stylematch::style;
using stylematch::sinkhorn::Measure;

namespace {

Tensor random_map(Rng& rng, int64_t c, int64_t h, int64_t w) {
  Tensor t({c, h, w});
  for (auto& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

StyleEps init_eps_from(const BatchTaps& src, const BatchTaps& tgt,
                       const LayerTapSet& taps) {
  StyleEps eps = make_style_eps(taps.count(), 0.9);
  update_style_eps(src, tgt, taps, eps, true);
  return eps;
}

}  // namespace

TEST_CASE("style_stats: constant map, symmetric values, loop oracle") {
  Tensor constant({2, 3, 3}, 3.0);
  StyleStats st = style_stats(constant, 1);
  CHECK(st.mu[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(st.mu[1] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(st.sigma[0] == doctest::Approx(std::sqrt(1e-5)).epsilon(1e-12));

  Tensor pm({1, 1, 2});
  pm[0] = -1.0;
  pm[1] = 1.0;
  StyleStats st2 = style_stats(pm, 1);
  CHECK(st2.mu[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(st2.sigma[0] == doctest::Approx(std::sqrt(1.0 + 1e-5)).epsilon(1e-12));

  Rng rng(41);
  Tensor map = random_map(rng, 3, 4, 5);
  StyleStats st3 = style_stats(map, 2);
  for (int64_t c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (int64_t y = 0; y < 4; ++y)
      for (int64_t x = 0; x < 5; ++x) mean += map.at(c, y, x);
    mean /= 20.0;
    double var = 0.0;
    for (int64_t y = 0; y < 4; ++y)
      for (int64_t x = 0; x < 5; ++x) {
        double d = map.at(c, y, x) - mean;
        var += d * d;
      }
    var /= 20.0;
    CHECK(st3.mu[c] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(st3.sigma[c] ==
          doctest::Approx(std::sqrt(var + 1e-5)).epsilon(1e-12));
  }

  Tensor empty({2, 0, 3});
  CHECK_THROWS_AS(style_stats(empty, 1), ShapeError);
}

TEST_CASE("style_stats of an instance-normalized map") {
  Rng rng(42);
  Tensor map = random_map(rng, 4, 6, 6);
  StyleStats st = style_stats(map, 1);
  // normalize each channel to zero mean, unit variance
  Tensor normed = map;
  for (int64_t c = 0; c < 4; ++c)
    for (int64_t y = 0; y < 6; ++y)
      for (int64_t x = 0; x < 6; ++x) {
        double sigma_raw =
            std::sqrt(st.sigma[c] * st.sigma[c] - 1e-5);
        normed.at(c, y, x) = (map.at(c, y, x) - st.mu[c]) / sigma_raw;
      }
  StyleStats stn = style_stats(normed, 1);
  for (int64_t c = 0; c < 4; ++c) {
    CHECK(std::abs(stn.mu[c]) < 1e-9);
    CHECK(std::abs(stn.sigma[c] - 1.0) < 1e-3);
  }
}

TEST_CASE("style_measures stacks per-image stats") {
  Rng rng(43);
  std::vector<Tensor> batch;
  for (int i = 0; i < 3; ++i) batch.push_back(random_map(rng, 2, 3, 3));
  auto [mu_m, sigma_m] = style_measures(batch, 1);
  CHECK(mu_m.size() == 3);
  CHECK(mu_m.dim() == 2);
  for (int64_t i = 0; i < 3; ++i) {
    StyleStats st = style_stats(batch[static_cast<size_t>(i)], 1);
    for (int64_t c = 0; c < 2; ++c) {
      CHECK(mu_m.points.at(i, c) == st.mu[c]);
      CHECK(sigma_m.points.at(i, c) == st.sigma[c]);
    }
  }

  // constant maps 0 and 1 -> mu points {0, 1}
  std::vector<Tensor> pairb{Tensor({1, 2, 2}, 0.0), Tensor({1, 2, 2}, 1.0)};
  auto [mu2, sigma2] = style_measures(pairb, 1);
  CHECK(mu2.points.at(0, 0) == 0.0);
  CHECK(mu2.points.at(1, 0) == 1.0);

  std::vector<Tensor> single{Tensor({1, 2, 2}, 0.0)};
  CHECK_THROWS_AS(style_measures(single, 1), ShapeError);
}

TEST_CASE("style_matching_loss: identical batches, compositionality") {
  Rng rng(44);
  LayerTapSet taps;
  taps.layers = {1, 2};
  taps.channels = {2, 3};

  BatchTaps src(2), tgt(2);
  for (int i = 0; i < 4; ++i) {
    src[0].push_back(random_map(rng, 2, 4, 4));
    src[1].push_back(random_map(rng, 3, 2, 2));
    tgt[0].push_back(random_map(rng, 2, 4, 4));
    tgt[1].push_back(random_map(rng, 3, 2, 2));
  }

  // identical batches -> 0
  StyleEps eps_same = make_style_eps(2, 0.9);
  // eps estimate over identical batches is positive (cross-image distances)
  update_style_eps(src, src, taps, eps_same, true);
  StyleLossBreakdown same =
      style_matching_loss(src, src, taps, eps_same, 10);
  CHECK(std::abs(same.total) <= 1e-8);

  // L_f = 1 equals one mu-term plus one sigma-term, directly recomputed
  LayerTapSet tap1;
  tap1.layers = {1};
  tap1.channels = {2};
  BatchTaps src1{src[0]}, tgt1{tgt[0]};
  StyleEps eps1 = init_eps_from(src1, tgt1, tap1);
  StyleLossBreakdown l1 = style_matching_loss(src1, tgt1, tap1, eps1, 10);
  auto [pmu, psigma] = style_measures(src[0], 1);
  auto [qmu, qsigma] = style_measures(tgt[0], 1);
  double direct =
      sinkhorn::sinkhorn_divergence(pmu, qmu, eps1.mu[0].eps, 10) +
      sinkhorn::sinkhorn_divergence(psigma, qsigma, eps1.sigma[0].eps, 10);
  CHECK(l1.total == doctest::Approx(direct).epsilon(1e-12));

  // L_f = 2 equals the sum of the two single-layer evaluations
  StyleEps eps2 = init_eps_from(src, tgt, taps);
  StyleLossBreakdown l2 = style_matching_loss(src, tgt, taps, eps2, 10);
  LayerTapSet tap2only;
  tap2only.layers = {2};
  tap2only.channels = {3};
  BatchTaps src2{src[1]}, tgt2{tgt[1]};
  StyleEps eps2only = init_eps_from(src2, tgt2, tap2only);
  StyleLossBreakdown l2only =
      style_matching_loss(src2, tgt2, tap2only, eps2only, 10);
  CHECK(l2.total ==
        doctest::Approx(l1.total + l2only.total).epsilon(1e-10));

  // permutation invariance of the empirical measures
  BatchTaps src_perm(2);
  src_perm[0] = {src[0][2], src[0][0], src[0][3], src[0][1]};
  src_perm[1] = {src[1][2], src[1][0], src[1][3], src[1][1]};
  StyleEps eps_perm = make_style_eps(2, 0.9);
  update_style_eps(src, src_perm, taps, eps_perm, true);
  StyleLossBreakdown perm =
      style_matching_loss(src, src_perm, taps, eps_perm, 10);
  CHECK(std::abs(perm.total) <= 1e-8);
  CHECK(perm.total >= -1e-7);
  CHECK(l2.total >= -1e-7);
}

TEST_CASE("style_matching_loss gradient matches finite differences") {
  Rng rng(45);
  LayerTapSet taps;
  taps.layers = {1};
  taps.channels = {3};
  BatchTaps src(1), tgt(1);
  for (int i = 0; i < 3; ++i) {
    src[0].push_back(random_map(rng, 3, 3, 3));
    tgt[0].push_back(random_map(rng, 3, 3, 3));
  }
  StyleEps eps = init_eps_from(src, tgt, taps);
  StyleLossGrads g = style_matching_loss_grad(src, tgt, taps, eps, 10);

  const double h = 1e-5;
  auto loss_with = [&](const BatchTaps& s, const BatchTaps& t) {
    return style_matching_loss(s, t, taps, eps, 10).total;
  };
  int checked = 0;
  for (size_t img = 0; img < 3; ++img)
    for (int64_t e = 0; e < src[0][img].numel(); e += 5) {
      BatchTaps plus = src, minus = src;
      plus[0][img][e] += h;
      minus[0][img][e] -= h;
      double fd = (loss_with(plus, tgt) - loss_with(minus, tgt)) / (2.0 * h);
      double denom = std::max(std::abs(fd), 1e-7);
      CHECK(std::abs(g.d_source[0][img][e] - fd) / denom < 1e-4);
      ++checked;

      BatchTaps tplus = tgt, tminus = tgt;
      tplus[0][img][e] += h;
      tminus[0][img][e] -= h;
      double fdt =
          (loss_with(src, tplus) - loss_with(src, tminus)) / (2.0 * h);
      double denomt = std::max(std::abs(fdt), 1e-7);
      CHECK(std::abs(g.d_target[0][img][e] - fdt) / denomt < 1e-4);
    }
  CHECK(checked > 10);
}

TEST_CASE("mmd_loss: identity, closed form, loop oracle, symmetry") {
  Rng rng(46);
  Tensor pts({4, 3});
  for (auto& v : pts.values()) v = rng.uniform(-1.0, 1.0);
  Measure p(pts);
  CHECK(std::abs(mmd_loss(p, p, {1.0})) <= 1e-9);

  // single points at distance d: 2 (1 - exp(-d^2 / bw^2))
  Measure a(Tensor::from_values({1, 1}, {0.0}));
  Measure b(Tensor::from_values({1, 1}, {1.5}));
  double bw = 0.8;
  double want = 2.0 * (1.0 - std::exp(-2.25 / (bw * bw)));
  CHECK(mmd_loss(a, b, {bw}) == doctest::Approx(want).epsilon(1e-12));

  Tensor qts({5, 3});
  for (auto& v : qts.values()) v = rng.uniform(-1.0, 1.0);
  Measure q(qts);
  std::vector<double> bws = {0.5, 1.0, 2.0};
  double got = mmd_loss(p, q, bws);
  double oracle = 0.0;
  auto kernel = [&](const Tensor& x, int64_t i, const Tensor& y, int64_t j,
                    double bandwidth) {
    double d2 = 0.0;
    for (int64_t t = 0; t < 3; ++t) {
      double diff = x.at(i, t) - y.at(j, t);
      d2 += diff * diff;
    }
    return std::exp(-d2 / (bandwidth * bandwidth));
  };
  for (double bandwidth : bws) {
    double pp = 0.0, qq = 0.0, pq = 0.0;
    for (int64_t i = 0; i < 4; ++i)
      for (int64_t j = 0; j < 4; ++j) pp += kernel(pts, i, pts, j, bandwidth);
    for (int64_t i = 0; i < 5; ++i)
      for (int64_t j = 0; j < 5; ++j) qq += kernel(qts, i, qts, j, bandwidth);
    for (int64_t i = 0; i < 4; ++i)
      for (int64_t j = 0; j < 5; ++j) pq += kernel(pts, i, qts, j, bandwidth);
    oracle += pp / 16.0 + qq / 25.0 - 2.0 * pq / 20.0;
  }
  CHECK(got == doctest::Approx(oracle).epsilon(1e-12));

  CHECK(mmd_loss(p, q, bws) == mmd_loss(q, p, bws));

  CHECK_THROWS_AS(mmd_loss(p, q, {}), ConfigError);
}

TEST_CASE("mmd gradient matches finite differences") {
  Rng rng(47);
  Tensor pts({3, 2}), qts({4, 2});
  for (auto& v : pts.values()) v = rng.uniform(-1.0, 1.0);
  for (auto& v : qts.values()) v = rng.uniform(-1.0, 1.0);
  Measure p(pts), q(qts);
  std::vector<double> bws = {0.7, 1.3};
  MmdGrad g = mmd_loss_grad(p, q, bws);
  const double h = 1e-6;
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t t = 0; t < 2; ++t) {
      Tensor plus = pts, minus = pts;
      plus.at(i, t) += h;
      minus.at(i, t) -= h;
      double fd = (mmd_loss(Measure(plus), q, bws) -
                   mmd_loss(Measure(minus), q, bws)) /
                  (2.0 * h);
      CHECK(g.grad_p.at(i, t) ==
            doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("eps update happens per layer and per statistic") {
  Rng rng(48);
  LayerTapSet taps;
  taps.layers = {1, 2};
  taps.channels = {2, 2};
  BatchTaps src(2), tgt(2);
  for (int i = 0; i < 3; ++i) {
    src[0].push_back(random_map(rng, 2, 3, 3));
    src[1].push_back(random_map(rng, 2, 2, 2));
    tgt[0].push_back(random_map(rng, 2, 3, 3));
    tgt[1].push_back(random_map(rng, 2, 2, 2));
  }
  StyleEps eps = make_style_eps(2, 0.9);
  update_style_eps(src, tgt, taps, eps, true);
  CHECK(eps.mu[0].initialized);
  CHECK(eps.sigma[0].initialized);
  CHECK(eps.mu[0].eps > 0.0);
  // mu and sigma scales genuinely differ
  CHECK(eps.mu[0].eps != eps.sigma[0].eps);
  CHECK(eps.mu[0].eps != eps.mu[1].eps);
}
