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
#include "stylematch/datagen.hpp"
#include "stylematch/discriminator.hpp"
#include "stylematch/rng.hpp"

using namespace stylematch;
using namespace stylematch::disc;

namespace {

Tensor random_map(Rng& rng, int64_t c, int64_t h, int64_t w) {
  Tensor t({c, h, w});
  for (auto& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

Config tiny_config() {
  Config cfg;
  cfg.stack.in_channels = 1;
  cfg.stack.in_h = 8;
  cfg.stack.in_w = 8;
  cfg.stack.blocks = {{3, true}, {4, true}};
  return cfg;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("unit_normalize: one-hot, 3-4-5, random norms") {
  Tensor hot({3, 1, 1});
  hot.at(1, 0, 0) = 1.0;
  Tensor n = unit_normalize(hot);
  CHECK(n.at(1, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(n.at(0, 0, 0) == 0.0);

  Tensor v34({2, 1, 1});
  v34.at(0, 0, 0) = 3.0;
  v34.at(1, 0, 0) = 4.0;
  Tensor n34 = unit_normalize(v34);
  CHECK(n34.at(0, 0, 0) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(n34.at(1, 0, 0) == doctest::Approx(0.8).epsilon(1e-9));

  Rng rng(51);
  Tensor map = random_map(rng, 4, 5, 5);
  Tensor norm = unit_normalize(map);
  for (int64_t s = 0; s < 25; ++s) {
    double n2 = 0.0;
    for (int64_t c = 0; c < 4; ++c) n2 += norm[c * 25 + s] * norm[c * 25 + s];
    CHECK(std::abs(std::sqrt(n2) - 1.0) < 1e-6);
  }

  Tensor zero({2, 2, 2});
  Tensor nz = unit_normalize(zero);
  for (double x : nz.values()) CHECK(x == 0.0);
}

TEST_CASE("perceptual_scalar: zero weights, one-hot, loop oracle") {
  Rng rng(52);
  Tensor map = unit_normalize(random_map(rng, 3, 4, 4));
  Tensor zero_u({3});
  CHECK(perceptual_scalar(map, zero_u) == 0.0);

  Tensor hot({3, 2, 2});
  for (int64_t s = 0; s < 4; ++s) hot[1 * 4 + s] = 1.0;
  Tensor nhot = unit_normalize(hot);
  Tensor e1({3});
  e1[1] = 1.0;
  CHECK(perceptual_scalar(nhot, e1) == doctest::Approx(1.0).epsilon(1e-9));

  Tensor u({3});
  for (auto& x : u.values()) x = rng.uniform(0.0, 1.0);
  double oracle = 0.0;
  for (int64_t y = 0; y < 4; ++y)
    for (int64_t x = 0; x < 4; ++x) {
      double dot = 0.0;
      for (int64_t c = 0; c < 3; ++c) dot += u[c] * map.at(c, y, x);
      oracle += dot;
    }
  oracle /= 16.0;
  CHECK(perceptual_scalar(map, u) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("score: neutral v, sigmoid closed form, staged recomputation") {
  Config cfg = tiny_config();
  Rng rng(53);
  Params params = init_params(cfg, rng);
  Tensor img = random_map(rng, 1, 8, 8);

  // v == 0 at init: g == 0.5 regardless of input
  CHECK(score(img, cfg, params) == doctest::Approx(0.5).epsilon(1e-15));

  // arrange v^T r = ln 3 -> score 0.75
  ScoreTrace trace;
  for (auto& x : params.v.values()) x = 0.0;
  params.v[0] = 1.0;
  score(img, cfg, params, &trace);
  REQUIRE(trace.r[0] != 0.0);
  params.v[0] = std::log(3.0) / trace.r[0];
  CHECK(score(img, cfg, params) == doctest::Approx(0.75).epsilon(1e-12));

  // staged recomputation of v^T r from the public pieces
  for (auto& x : params.v.values()) x = rng.uniform(-1.0, 1.0);
  double g = score(img, cfg, params, &trace);
  nn::StackTrace stack;
  nn::conv_stack_forward(img, cfg.stack, params.convs, &stack);
  double logit = 0.0;
  for (size_t l = 0; l < params.u.size(); ++l)
    logit += params.v[static_cast<int64_t>(l)] *
             perceptual_scalar(unit_normalize(stack.act[l]), params.u[l]);
  CHECK(g == doctest::Approx(sigmoid(logit)).epsilon(1e-12));
}

TEST_CASE("score invariant to positive rescaling of tap activations") {
  Config cfg = tiny_config();
  Rng rng(54);
  Params params = init_params(cfg, rng);
  for (auto& x : params.v.values()) x = rng.uniform(-1.0, 1.0);
  Tensor img = random_map(rng, 1, 8, 8);
  ScoreTrace trace;
  score(img, cfg, params, &trace);

  auto head = [&](const std::vector<Tensor>& acts) {
    double logit = 0.0;
    for (size_t l = 0; l < acts.size(); ++l)
      logit += params.v[static_cast<int64_t>(l)] *
               perceptual_scalar(unit_normalize(acts[l]), params.u[l]);
    return sigmoid(logit);
  };
  std::vector<Tensor> rescaled;
  for (const Tensor& act : trace.stack.act)
    rescaled.push_back(scaled(act, 3.7));
  CHECK(std::abs(head(trace.stack.act) - head(rescaled)) < 1e-9);
}

TEST_CASE("domain_loss and weight_classification arithmetic") {
  CHECK(domain_loss(0.0, 1.0) == 0.0);
  CHECK(domain_loss(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(domain_loss(1.0, 0.0) == 2.0);

  CHECK(weight_classification(0.0, 5.0) == 0.0);
  CHECK(weight_classification(1.0, 5.0) == 5.0);
  CHECK(weight_classification(0.3, 2.0) == doctest::Approx(0.6).epsilon(1e-15));
  // never increases the loss, preserves zero
  CHECK(weight_classification(0.99, 3.0) <= 3.0);
  CHECK(weight_classification(0.7, 0.0) == 0.0);
}

TEST_CASE("weighted source-score mean exceeds the unweighted mean") {
  Rng rng(55);
  std::vector<double> g;
  for (int i = 0; i < 200; ++i) g.push_back(rng.uniform(0.01, 0.99));
  double sum = 0.0, sum_sq = 0.0;
  for (double x : g) {
    sum += x;
    sum_sq += x * x;
  }
  CHECK(sum_sq / sum >= sum / static_cast<double>(g.size()));
}

TEST_CASE("domain loss gradients match finite differences on all params") {
  Config cfg = tiny_config();
  Rng rng(56);
  Params params = init_params(cfg, rng);
  // move off the v=0 saddle and give u some structure
  for (auto& x : params.v.values()) x = rng.uniform(-0.5, 0.5);
  for (Tensor& u : params.u)
    for (auto& x : u.values()) x = rng.uniform(0.05, 0.3);

  std::vector<Tensor> source, target;
  for (int i = 0; i < 2; ++i) {
    source.push_back(random_map(rng, 1, 8, 8));
    target.push_back(random_map(rng, 1, 8, 8));
  }

  auto batch_loss = [&](const Params& p) {
    double acc = 0.0;
    for (size_t i = 0; i < source.size(); ++i)
      acc += 0.5 * domain_loss(score(source[i], cfg, p),
                               score(target[i], cfg, p));
    return acc;
  };

  Grads grads = zero_grads(params);
  for (size_t i = 0; i < source.size(); ++i) {
    ScoreTrace ts, tt;
    double gs = score(source[i], cfg, params, &ts);
    double gt = score(target[i], cfg, params, &tt);
    score_backward(cfg, params, ts, 0.5 * 2.0 * gs, grads);
    score_backward(cfg, params, tt, 0.5 * 2.0 * (gt - 1.0), grads);
  }

  const double h = 1e-5;
  auto check_param = [&](Tensor& param, const Tensor& grad, int64_t stride) {
    for (int64_t e = 0; e < param.numel(); e += stride) {
      double keep = param[e];
      param[e] = keep + h;
      double up = batch_loss(params);
      param[e] = keep - h;
      double down = batch_loss(params);
      param[e] = keep;
      double fd = (up - down) / (2.0 * h);
      double denom = std::max(std::abs(fd), 1e-7);
      CHECK(std::abs(grad[e] - fd) / denom < 1e-4);
    }
  };
  check_param(params.v, grads.v, 1);
  for (size_t l = 0; l < params.u.size(); ++l)
    check_param(params.u[l], grads.u[l], 1);
  for (size_t li = 0; li < params.convs.size(); ++li) {
    check_param(params.convs[li].w, grads.conv.dw[li], 7);
    check_param(params.convs[li].b, grads.conv.db[li], 1);
  }
}

TEST_CASE("train_discriminator separates a shifted domain, not a shared one") {
  auto build_images = [](double shift, uint64_t seed, int count,
                         std::vector<Tensor>& out) {
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
      Tensor img({1, 8, 8});
      for (auto& v : img.values())
        v = 0.4 + shift + 0.08 * rng.gaussian();
      out.push_back(img);
    }
  };

  // disjoint brightness ranges: easy to separate
  std::vector<Tensor> src, tgt;
  build_images(0.0, 1, 60, src);
  build_images(0.3, 2, 60, tgt);
  std::vector<Tensor> src_train(src.begin(), src.begin() + 40);
  std::vector<Tensor> tgt_train(tgt.begin(), tgt.begin() + 40);

  Config cfg = tiny_config();
  TrainConfig tc;
  tc.epochs = 30;
  tc.lr = 0.2;
  tc.batch_pairs = 8;
  Rng rng(57);
  TrainResult res = train_discriminator(src_train, tgt_train, cfg, tc, rng);

  std::vector<double> held_src, held_tgt;
  for (size_t i = 40; i < 60; ++i) {
    held_src.push_back(score(src[i], cfg, res.params));
    held_tgt.push_back(score(tgt[i], cfg, res.params));
  }
  CHECK(auc(held_src, held_tgt) > 0.95);

  // identical distributions: held-out AUC stays near chance
  std::vector<Tensor> src2, tgt2;
  build_images(0.0, 3, 60, src2);
  build_images(0.0, 4, 60, tgt2);
  std::vector<Tensor> src2_train(src2.begin(), src2.begin() + 40);
  std::vector<Tensor> tgt2_train(tgt2.begin(), tgt2.begin() + 40);
  Rng rng2(58);
  TrainResult res2 =
      train_discriminator(src2_train, tgt2_train, cfg, tc, rng2);
  std::vector<double> h2s, h2t;
  for (size_t i = 40; i < 60; ++i) {
    h2s.push_back(score(src2[i], cfg, res2.params));
    h2t.push_back(score(tgt2[i], cfg, res2.params));
  }
  double chance = auc(h2s, h2t);
  CHECK(chance > 0.25);
  CHECK(chance < 0.75);

  // u stays nonnegative after training
  for (const Tensor& u : res.params.u)
    for (double x : u.values()) CHECK(x >= 0.0);
}

TEST_CASE("score_histogram: boundary convention, weights, loop oracle") {
  Histogram h = score_histogram({0.5, 0.5, 0.5}, nullptr, 2);
  CHECK(h.mass[0] == 0.0);
  CHECK(h.mass[1] == 3.0);

  Rng rng(59);
  std::vector<double> scores;
  for (int i = 0; i < 100; ++i) scores.push_back(rng.next_double());
  std::vector<double> ones(scores.size(), 1.0);
  Histogram unweighted = score_histogram(scores, nullptr, 7);
  Histogram weighted = score_histogram(scores, &ones, 7);
  for (size_t b = 0; b < 7; ++b)
    CHECK(unweighted.mass[b] == weighted.mass[b]);

  std::vector<double> mass(7, 0.0);
  for (double s : scores) {
    int bin = std::min(static_cast<int>(s * 7.0), 6);
    mass[static_cast<size_t>(bin)] += 1.0;
  }
  for (size_t b = 0; b < 7; ++b) CHECK(unweighted.mass[b] == mass[b]);

  CHECK_THROWS_AS(score_histogram({0.5}, nullptr, 1), ConfigError);
}

TEST_CASE("auc rank statistic") {
  CHECK(auc({0.1, 0.2}, {0.8, 0.9}) == 1.0);
  CHECK(auc({0.8, 0.9}, {0.1, 0.2}) == 0.0);
  CHECK(auc({0.5}, {0.5}) == 0.5);  // tie -> midrank
}
