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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stylematch/rng.hpp"
#include "stylematch/tensor.hpp"

namespace stylematch::datagen {

constexpr int64_t kImageSize = 32;

/// One of three geometric primitives; an identity is defined by three of
/// them (one of each kind).
struct Primitive {
  enum class Kind { Disc, Ring, Bar };
  Kind kind = Kind::Disc;
  double cx = 16.0, cy = 16.0;
  double radius = 4.0;     // disc radius / ring outer radius / bar half-length
  double thickness = 2.0;  // ring band width / bar half-width
  double angle = 0.0;      // bar orientation
  double intensity = 0.4;
};

struct IdentitySpec {
  int64_t id = 0;
  std::array<Primitive, 3> primitives;
  double jitter = 1.5;  // translation jitter range in pixels (pose analog)
};

/// Per-image style draw; the domain gap lives in the draw ranges.
struct StyleSpec {
  double brightness = 0.0;
  double contrast = 1.0;
  double texture_amplitude = 0.0;
  int64_t blur_radius = 0;
  std::string domain;  // "source" or "target"
};

struct StyleRanges {
  double brightness_lo = 0.0, brightness_hi = 0.0;
  double contrast_lo = 1.0, contrast_hi = 1.0;
  double texture_lo = 0.0, texture_hi = 0.0;
  double blur_probability = 0.0;
};

/// Source ranges are gap-independent; the target brightness window shifts
/// by 0.25*gap, which leaves the two windows disjoint for gap > 0.32.
StyleRanges source_style_ranges(double gap);
StyleRanges target_style_ranges(double gap);
double target_brightness_shift(double gap);

StyleSpec sample_style(const StyleRanges& ranges, const std::string& domain,
                       Rng& rng);

/// Rasterizes the primitives (soft 1px edges over a 0.15 background), then
/// applies style in fixed order contrast -> brightness -> texture -> blur,
/// clamped to [0,1].  Values are float32-quantized so the in-memory tensor
/// equals the stored one.
Tensor render(const IdentitySpec& identity, const StyleSpec& style, Rng& rng);

struct ImageRecord {
  int64_t index = 0;
  int64_t identity = 0;  // global identity id
  StyleSpec style;
};

struct TemplateDef {
  int64_t id = 0;
  int64_t subject = 0;
  std::vector<std::vector<int64_t>> media;  // media -> target image indices
};

struct VerificationPair {
  int64_t template_a = 0, template_b = 0;
  int label = 0;  // 1 same subject, 0 different
};

struct GenerateConfig {
  uint64_t seed = 1;
  int64_t n_source_identities = 50;
  int64_t n_target_identities = 30;
  int64_t images_per_source_identity = 40;
  int64_t images_per_target_identity = 30;
  double gap = 0.6;
  int kfolds = 10;
};

struct DatasetBundle {
  GenerateConfig config;
  std::vector<IdentitySpec> source_identities, target_identities;
  std::vector<Tensor> source_images, target_images;
  std::vector<int64_t> source_labels;    // class index == source identity id
  std::vector<int64_t> target_subjects;  // per target image, global id
  std::vector<ImageRecord> source_records, target_records;

  // verification protocol over target images
  std::vector<TemplateDef> templates;
  std::vector<VerificationPair> pairs;                // full list, TPR@FPR
  std::vector<std::vector<VerificationPair>> folds;   // balanced k-fold

  // identification protocol
  std::vector<TemplateDef> gallery_templates;
  std::vector<TemplateDef> known_probe_templates;
  std::vector<TemplateDef> unknown_probe_templates;
};

/// Deterministic in config.seed; identity sets of the two domains are
/// disjoint; unknown probe subjects never appear in the gallery.
DatasetBundle generate(const GenerateConfig& config);

}  // namespace stylematch::datagen
