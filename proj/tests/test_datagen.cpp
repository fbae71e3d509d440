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
#include <cstring>
#include <map>
#include <set>

#include "doctest.h"
#include "stylematch/datagen.hpp"
#include "stylematch/eval.hpp"

using namespace stylematch;
using namespace stylematch::datagen;

namespace {

GenerateConfig small_config(double gap, uint64_t seed = 7) {
  GenerateConfig cfg;
  cfg.seed = seed;
  cfg.n_source_identities = 6;
  cfg.n_target_identities = 6;
  cfg.images_per_source_identity = 8;
  cfg.images_per_target_identity = 12;
  cfg.gap = gap;
  cfg.kfolds = 4;
  return cfg;
}

double image_mean(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v;
  return acc / static_cast<double>(t.numel());
}

}  // namespace

TEST_CASE("generation is byte-deterministic in the seed") {
  DatasetBundle a = generate(small_config(0.5));
  DatasetBundle b = generate(small_config(0.5));
  REQUIRE(a.source_images.size() == b.source_images.size());
  for (size_t i = 0; i < a.source_images.size(); ++i)
    CHECK(std::memcmp(a.source_images[i].data(), b.source_images[i].data(),
                      static_cast<size_t>(a.source_images[i].numel()) * 8) ==
          0);
  for (size_t i = 0; i < a.target_images.size(); ++i)
    CHECK(std::memcmp(a.target_images[i].data(), b.target_images[i].data(),
                      static_cast<size_t>(a.target_images[i].numel()) * 8) ==
          0);

  DatasetBundle c = generate(small_config(0.5, 8));
  bool any_diff = false;
  for (size_t i = 0; i < a.source_images.size() && !any_diff; ++i)
    if (std::memcmp(a.source_images[i].data(), c.source_images[i].data(),
                    static_cast<size_t>(a.source_images[i].numel()) * 8) != 0)
      any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("identity sets are disjoint and separable") {
  DatasetBundle ds = generate(small_config(0.5));
  std::set<int64_t> src_ids, tgt_ids;
  for (const auto& id : ds.source_identities) src_ids.insert(id.id);
  for (const auto& id : ds.target_identities) tgt_ids.insert(id.id);
  for (int64_t id : tgt_ids) CHECK_FALSE(src_ids.count(id));
  CHECK(src_ids.size() == 6);
  CHECK(tgt_ids.size() == 6);
}

TEST_CASE("style ranges: identical at gap 0, disjoint brightness at gap 1") {
  StyleRanges s0 = source_style_ranges(0.0);
  StyleRanges t0 = target_style_ranges(0.0);
  CHECK(s0.brightness_lo == t0.brightness_lo);
  CHECK(s0.brightness_hi == t0.brightness_hi);
  CHECK(s0.texture_hi == t0.texture_hi);
  CHECK(t0.blur_probability == 0.0);

  StyleRanges t1 = target_style_ranges(1.0);
  CHECK(t1.brightness_lo > s0.brightness_hi);  // disjoint coordinate

  StyleRanges t05 = target_style_ranges(0.5);
  CHECK(t05.brightness_lo > s0.brightness_hi);
}

TEST_CASE("gap 1: mean target brightness exceeds source by the offset") {
  GenerateConfig cfg = small_config(1.0);
  cfg.n_source_identities = 8;
  cfg.n_target_identities = 8;
  cfg.images_per_source_identity = 30;
  cfg.images_per_target_identity = 30;
  DatasetBundle ds = generate(cfg);
  double src_mean = 0.0, tgt_mean = 0.0;
  for (const Tensor& img : ds.source_images) src_mean += image_mean(img);
  for (const Tensor& img : ds.target_images) tgt_mean += image_mean(img);
  src_mean /= static_cast<double>(ds.source_images.size());
  tgt_mean /= static_cast<double>(ds.target_images.size());
  CHECK(std::abs((tgt_mean - src_mean) - target_brightness_shift(1.0)) <
        0.02);
}

TEST_CASE("render: neutral style, brightness offset, blur preserves mean") {
  DatasetBundle ds = generate(small_config(0.5));
  const IdentitySpec& id = ds.source_identities[0];

  StyleSpec neutral;
  neutral.domain = "test";
  Rng r1(123);
  Tensor base = render(id, neutral, r1);
  for (double v : base.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  StyleSpec bright = neutral;
  bright.brightness = 0.2;
  Rng r2(123);  // same jitter stream
  Tensor shifted = render(id, bright, r2);
  for (int64_t i = 0; i < base.numel(); ++i)
    CHECK(shifted[i] - base[i] == doctest::Approx(0.2).epsilon(1e-6));

  StyleSpec blurred = neutral;
  blurred.blur_radius = 1;
  Rng r3(123);
  Tensor soft = render(id, blurred, r3);
  CHECK(std::abs(image_mean(soft) - image_mean(base)) < 1e-6);
}

TEST_CASE("protocols satisfy the open-set and fold invariants") {
  DatasetBundle ds = generate(small_config(0.6));

  std::set<int64_t> gallery_subjects;
  for (const auto& t : ds.gallery_templates) gallery_subjects.insert(t.subject);
  for (const auto& t : ds.known_probe_templates)
    CHECK(gallery_subjects.count(t.subject));
  for (const auto& t : ds.unknown_probe_templates)
    CHECK_FALSE(gallery_subjects.count(t.subject));
  CHECK(!ds.unknown_probe_templates.empty());
  CHECK(!ds.known_probe_templates.empty());

  // folds partition the balanced pair subset; pos/neg globally balanced
  std::set<std::pair<int64_t, int64_t>> seen;
  int64_t pos = 0, neg = 0, total = 0;
  for (const auto& fold : ds.folds) {
    CHECK(!fold.empty());
    for (const auto& p : fold) {
      auto key = std::minmax(p.template_a, p.template_b);
      CHECK_FALSE(seen.count(key));
      seen.insert(key);
      (p.label ? pos : neg) += 1;
      ++total;
    }
  }
  CHECK(pos == neg);

  // every template id referenced by a pair exists
  std::set<int64_t> tpl_ids;
  for (const auto& t : ds.templates) tpl_ids.insert(t.id);
  for (const auto& p : ds.pairs) {
    CHECK(tpl_ids.count(p.template_a));
    CHECK(tpl_ids.count(p.template_b));
  }

  // label correctness on the full list
  std::map<int64_t, int64_t> subject_of;
  for (const auto& t : ds.templates) subject_of[t.id] = t.subject;
  for (const auto& p : ds.pairs)
    CHECK(p.label ==
          (subject_of[p.template_a] == subject_of[p.template_b] ? 1 : 0));
}

TEST_CASE("dataset is learnable from raw pixels at gap >= 0.5") {
  GenerateConfig cfg = small_config(0.5, 11);
  DatasetBundle ds = generate(cfg);
  Rng rng(12);
  const StyleRanges ranges = target_style_ranges(0.5);
  int wins = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    // anchor and same-identity sample share one style; the impostor too
    Rng style_rng = rng.split(static_cast<uint64_t>(t));
    StyleSpec style = sample_style(ranges, "target", style_rng);
    int64_t ia = rng.next_int(6);
    int64_t ib = (ia + 1 + rng.next_int(5)) % 6;
    Rng ra = rng.split(1000 + static_cast<uint64_t>(t));
    Rng rb = rng.split(2000 + static_cast<uint64_t>(t));
    Rng rc = rng.split(3000 + static_cast<uint64_t>(t));
    Tensor anchor =
        render(ds.target_identities[static_cast<size_t>(ia)], style, ra);
    Tensor same =
        render(ds.target_identities[static_cast<size_t>(ia)], style, rb);
    Tensor other =
        render(ds.target_identities[static_cast<size_t>(ib)], style, rc);
    double cos_same = eval::cosine(anchor.reshaped({anchor.numel()}),
                                   same.reshaped({same.numel()}));
    double cos_other = eval::cosine(anchor.reshaped({anchor.numel()}),
                                    other.reshaped({other.numel()}));
    if (cos_same > cos_other) ++wins;
  }
  CHECK(wins >= static_cast<int>(0.95 * trials));
}

TEST_CASE("generate rejects nonpositive or inconsistent sizes") {
  GenerateConfig bad = small_config(0.5);
  bad.n_source_identities = 0;
  CHECK_THROWS_AS(generate(bad), ConfigError);
  GenerateConfig bad2 = small_config(0.5);
  bad2.images_per_target_identity = 6;
  CHECK_THROWS_AS(generate(bad2), ConfigError);
  GenerateConfig bad3 = small_config(1.5);
  CHECK_THROWS_AS(generate(bad3), ConfigError);
}
