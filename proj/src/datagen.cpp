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

#include "stylematch/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylematch/errors.hpp"

namespace stylematch::datagen {

namespace {

constexpr double kBackground = 0.15;
constexpr double kContrastPivot = 0.4;
constexpr double kSeparabilityMargin = 0.08;  // normalized parameter space
constexpr double kPi = 3.14159265358979323846;

struct ParamRange {
  double lo, hi;
};
constexpr ParamRange kCenter{9.0, 23.0};
constexpr ParamRange kDiscRadius{2.0, 5.0};
constexpr ParamRange kRingRadius{3.5, 8.0};
constexpr ParamRange kRingThickness{0.9, 2.0};
constexpr ParamRange kBarHalfLen{3.0, 7.5};
constexpr ParamRange kBarHalfWidth{0.7, 1.6};
constexpr ParamRange kIntensity{0.3, 0.55};

double draw(const ParamRange& r, Rng& rng) { return rng.uniform(r.lo, r.hi); }
double unit(const ParamRange& r, double v) { return (v - r.lo) / (r.hi - r.lo); }

Primitive sample_primitive(Primitive::Kind kind, Rng& rng) {
  Primitive p;
  p.kind = kind;
  p.cx = draw(kCenter, rng);
  p.cy = draw(kCenter, rng);
  p.intensity = draw(kIntensity, rng);
  switch (kind) {
    case Primitive::Kind::Disc:
      p.radius = draw(kDiscRadius, rng);
      break;
    case Primitive::Kind::Ring:
      p.radius = draw(kRingRadius, rng);
      p.thickness = draw(kRingThickness, rng);
      break;
    case Primitive::Kind::Bar:
      p.radius = draw(kBarHalfLen, rng);
      p.thickness = draw(kBarHalfWidth, rng);
      p.angle = rng.uniform(0.0, kPi);
      break;
  }
  return p;
}

// Normalized parameter vector; the L-inf distance between two identities
// must clear the separability margin.
std::vector<double> normalized_params(const IdentitySpec& id) {
  std::vector<double> v;
  for (const Primitive& p : id.primitives) {
    v.push_back(unit(kCenter, p.cx));
    v.push_back(unit(kCenter, p.cy));
    v.push_back(unit(kIntensity, p.intensity));
    switch (p.kind) {
      case Primitive::Kind::Disc:
        v.push_back(unit(kDiscRadius, p.radius));
        v.push_back(0.0);
        v.push_back(0.0);
        break;
      case Primitive::Kind::Ring:
        v.push_back(unit(kRingRadius, p.radius));
        v.push_back(unit(kRingThickness, p.thickness));
        v.push_back(0.0);
        break;
      case Primitive::Kind::Bar:
        v.push_back(unit(kBarHalfLen, p.radius));
        v.push_back(unit(kBarHalfWidth, p.thickness));
        v.push_back(p.angle / kPi);
        break;
    }
  }
  return v;
}

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

IdentitySpec sample_identity(int64_t id, Rng& rng,
                             const std::vector<std::vector<double>>& taken) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    IdentitySpec spec;
    spec.id = id;
    spec.primitives[0] = sample_primitive(Primitive::Kind::Disc, rng);
    spec.primitives[1] = sample_primitive(Primitive::Kind::Ring, rng);
    spec.primitives[2] = sample_primitive(Primitive::Kind::Bar, rng);
    spec.jitter = 1.8;
    std::vector<double> v = normalized_params(spec);
    bool ok = true;
    for (const auto& other : taken)
      if (linf(v, other) < kSeparabilityMargin) {
        ok = false;
        break;
      }
    if (ok) return spec;
  }
  throw NumericError("sample_identity: could not satisfy separability margin");
}

double coverage(double signed_dist) {
  // 1px soft edge
  double c = 0.5 - signed_dist;
  return std::clamp(c, 0.0, 1.0);
}

double primitive_distance(const Primitive& p, double x, double y, double dx,
                          double dy, double angle_jit, double radius_scale) {
  const double cx = p.cx + dx, cy = p.cy + dy;
  switch (p.kind) {
    case Primitive::Kind::Disc: {
      double d = std::hypot(x - cx, y - cy);
      return d - p.radius * radius_scale;
    }
    case Primitive::Kind::Ring: {
      double d = std::hypot(x - cx, y - cy);
      double mid = (p.radius - 0.5 * p.thickness) * radius_scale;
      return std::abs(d - mid) - 0.5 * p.thickness;
    }
    case Primitive::Kind::Bar: {
      double th = p.angle + angle_jit;
      double c = std::cos(th), s = std::sin(th);
      double u = c * (x - cx) + s * (y - cy);
      double v = -s * (x - cx) + c * (y - cy);
      return std::max(std::abs(u) - p.radius * radius_scale,
                      std::abs(v) - p.thickness);
    }
  }
  return 1e9;
}

void box_blur_wrap(Tensor& img, int64_t radius) {
  // separable box blur with wrap-around boundary (mean-preserving)
  const int64_t n = kImageSize;
  const double norm = 1.0 / static_cast<double>(2 * radius + 1);
  Tensor tmp({1, n, n});
  for (int64_t y = 0; y < n; ++y)
    for (int64_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int64_t k = -radius; k <= radius; ++k)
        acc += img.at(0, y, ((x + k) % n + n) % n);
      tmp.at(0, y, x) = acc * norm;
    }
  for (int64_t y = 0; y < n; ++y)
    for (int64_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int64_t k = -radius; k <= radius; ++k)
        acc += tmp.at(0, ((y + k) % n + n) % n, x);
      img.at(0, y, x) = acc * norm;
    }
}

}  // namespace

double target_brightness_shift(double gap) { return 0.25 * gap; }

StyleRanges source_style_ranges(double /*gap*/) {
  StyleRanges r;
  r.brightness_lo = -0.04;
  r.brightness_hi = 0.04;
  r.contrast_lo = 0.95;
  r.contrast_hi = 1.05;
  r.texture_lo = 0.0;
  r.texture_hi = 0.02;
  r.blur_probability = 0.0;
  return r;
}

StyleRanges target_style_ranges(double gap) {
  StyleRanges r = source_style_ranges(gap);
  // the target window both shifts and widens: deployment-style imagery is
  // brighter on average and more varied than the training data
  double shift = target_brightness_shift(gap);
  double widen = 0.05 * gap;
  r.brightness_lo += shift - widen;
  r.brightness_hi += shift + widen;
  r.texture_hi += 0.04 * gap;
  r.blur_probability = 0.6 * gap;
  return r;
}

StyleSpec sample_style(const StyleRanges& ranges, const std::string& domain,
                       Rng& rng) {
  StyleSpec s;
  s.domain = domain;
  s.brightness = rng.uniform(ranges.brightness_lo, ranges.brightness_hi);
  s.contrast = rng.uniform(ranges.contrast_lo, ranges.contrast_hi);
  s.texture_amplitude = rng.uniform(ranges.texture_lo, ranges.texture_hi);
  s.blur_radius = 0;
  if (rng.next_double() < ranges.blur_probability)
    s.blur_radius = rng.next_double() < 0.4 ? 2 : 1;
  return s;
}

Tensor render(const IdentitySpec& identity, const StyleSpec& style, Rng& rng) {
  const int64_t n = kImageSize;
  Tensor img({1, n, n}, kBackground);

  const double dx = rng.uniform(-identity.jitter, identity.jitter);
  const double dy = rng.uniform(-identity.jitter, identity.jitter);
  const double angle_jit = rng.uniform(-0.12, 0.12);
  const double radius_scale = rng.uniform(0.94, 1.06);

  for (const Primitive& p : identity.primitives)
    for (int64_t y = 0; y < n; ++y)
      for (int64_t x = 0; x < n; ++x) {
        double cov = coverage(primitive_distance(
            p, static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5, dx,
            dy, angle_jit, radius_scale));
        if (cov > 0.0) {
          double& px = img.at(0, y, x);
          px = px * (1.0 - cov) + p.intensity * cov;
        }
      }

  // style, fixed order: contrast -> brightness -> texture -> blur
  for (auto& v : img.values())
    v = style.contrast * (v - kContrastPivot) + kContrastPivot;
  for (auto& v : img.values()) v += style.brightness;
  if (style.texture_amplitude > 0.0) {
    double fx = static_cast<double>(1 + rng.next_int(3));
    double fy = static_cast<double>(1 + rng.next_int(3));
    double px = rng.uniform(0.0, 1.0), py = rng.uniform(0.0, 1.0);
    for (int64_t y = 0; y < n; ++y)
      for (int64_t x = 0; x < n; ++x)
        img.at(0, y, x) +=
            style.texture_amplitude *
            std::sin(2.0 * kPi * (fx * (static_cast<double>(x) / n) + px)) *
            std::sin(2.0 * kPi * (fy * (static_cast<double>(y) / n) + py));
  }
  if (style.blur_radius > 0) box_blur_wrap(img, style.blur_radius);
  for (auto& v : img.values()) v = std::clamp(v, 0.0, 1.0);

  // float32 quantization: the in-memory image equals the stored one
  for (auto& v : img.values()) v = static_cast<double>(static_cast<float>(v));
  return img;
}

DatasetBundle generate(const GenerateConfig& config) {
  if (config.n_source_identities < 2 || config.n_target_identities < 3 ||
      config.images_per_source_identity < 1 ||
      config.images_per_target_identity < 12)
    throw ConfigError(
        "generate: need >= 2 source ids, >= 3 target ids, >= 1 source "
        "image/id, >= 12 target images/id");
  if (config.gap < 0.0 || config.gap > 1.0)
    throw ConfigError("generate: gap must lie in [0,1]");
  if (config.kfolds < 2) throw ConfigError("generate: kfolds >= 2");

  DatasetBundle ds;
  ds.config = config;
  Rng root(config.seed);

  // identities: one global id space, source then target (disjoint by
  // construction), all separated in parameter space
  Rng id_rng = root.split(1);
  std::vector<std::vector<double>> taken;
  for (int64_t i = 0; i < config.n_source_identities; ++i) {
    IdentitySpec spec = sample_identity(i, id_rng, taken);
    taken.push_back(normalized_params(spec));
    ds.source_identities.push_back(spec);
  }
  for (int64_t i = 0; i < config.n_target_identities; ++i) {
    IdentitySpec spec =
        sample_identity(config.n_source_identities + i, id_rng, taken);
    taken.push_back(normalized_params(spec));
    ds.target_identities.push_back(spec);
  }

  // images; per-image derived streams keyed by global image index
  const StyleRanges src_ranges = source_style_ranges(config.gap);
  const StyleRanges tgt_ranges = target_style_ranges(config.gap);
  Rng img_rng = root.split(2);
  int64_t index = 0;
  for (int64_t i = 0; i < config.n_source_identities; ++i)
    for (int64_t k = 0; k < config.images_per_source_identity; ++k) {
      Rng r = img_rng.split(static_cast<uint64_t>(index));
      StyleSpec style = sample_style(src_ranges, "source", r);
      ds.source_images.push_back(
          render(ds.source_identities[static_cast<size_t>(i)], style, r));
      ds.source_labels.push_back(i);
      ds.source_records.push_back({index, i, style});
      ++index;
    }
  for (int64_t i = 0; i < config.n_target_identities; ++i)
    for (int64_t k = 0; k < config.images_per_target_identity; ++k) {
      Rng r = img_rng.split(static_cast<uint64_t>(index));
      StyleSpec style = sample_style(tgt_ranges, "target", r);
      ds.target_images.push_back(
          render(ds.target_identities[static_cast<size_t>(i)], style, r));
      int64_t subject = config.n_source_identities + i;
      ds.target_subjects.push_back(subject);
      ds.target_records.push_back(
          {static_cast<int64_t>(ds.target_images.size()) - 1, subject, style});
      ++index;
    }

  // ---- verification protocol: templates of 3 frames (2+1 media) ----
  const int64_t per_id = config.images_per_target_identity;
  const int64_t tpl_per_id = per_id / 3;
  int64_t tpl_id = 0;
  for (int64_t i = 0; i < config.n_target_identities; ++i) {
    const int64_t base = i * per_id;
    for (int64_t t = 0; t < tpl_per_id; ++t) {
      TemplateDef tpl;
      tpl.id = tpl_id++;
      tpl.subject = config.n_source_identities + i;
      tpl.media = {{base + 3 * t, base + 3 * t + 1}, {base + 3 * t + 2}};
      ds.templates.push_back(tpl);
    }
  }
  // positives within identity, negatives across: the full pair list
  std::vector<VerificationPair> positives, negatives;
  for (size_t a = 0; a < ds.templates.size(); ++a)
    for (size_t b = a + 1; b < ds.templates.size(); ++b) {
      VerificationPair pair{ds.templates[a].id, ds.templates[b].id,
                            ds.templates[a].subject == ds.templates[b].subject
                                ? 1
                                : 0};
      (pair.label ? positives : negatives).push_back(pair);
      ds.pairs.push_back(pair);
    }

  // balanced k-fold subset: all positives plus an equal negative sample
  Rng fold_rng = root.split(3);
  std::vector<size_t> neg_idx(negatives.size());
  std::iota(neg_idx.begin(), neg_idx.end(), 0);
  fold_rng.shuffle(neg_idx);
  std::vector<VerificationPair> balanced = positives;
  for (size_t i = 0; i < positives.size() && i < neg_idx.size(); ++i)
    balanced.push_back(negatives[neg_idx[i]]);
  std::vector<size_t> order(balanced.size());
  std::iota(order.begin(), order.end(), 0);
  fold_rng.shuffle(order);
  ds.folds.assign(static_cast<size_t>(config.kfolds), {});
  for (size_t i = 0; i < order.size(); ++i)
    ds.folds[i % static_cast<size_t>(config.kfolds)].push_back(
        balanced[order[i]]);

  // ---- identification protocol ----
  const int64_t known_count = (2 * config.n_target_identities) / 3;
  for (int64_t i = 0; i < config.n_target_identities; ++i) {
    const int64_t base = i * per_id;
    const int64_t subject = config.n_source_identities + i;
    if (i < known_count) {
      TemplateDef gal;
      gal.id = 1000 + i;
      gal.subject = subject;
      gal.media.resize(2);
      for (int64_t k = 0; k < 5; ++k) gal.media[0].push_back(base + k);
      for (int64_t k = 5; k < 10; ++k) gal.media[1].push_back(base + k);
      ds.gallery_templates.push_back(gal);
      int64_t probe_seq = 0;
      for (int64_t k = 10; k + 1 < per_id; k += 2) {
        TemplateDef probe;
        probe.id = 2000 + i * 100 + probe_seq++;
        probe.subject = subject;
        probe.media = {{base + k, base + k + 1}};
        ds.known_probe_templates.push_back(probe);
      }
    } else {
      int64_t probe_seq = 0;
      for (int64_t k = 0; k + 1 < per_id; k += 2) {
        TemplateDef probe;
        probe.id = 100000 + i * 100 + probe_seq++;
        probe.subject = subject;
        probe.media = {{base + k, base + k + 1}};
        ds.unknown_probe_templates.push_back(probe);
      }
    }
  }
  return ds;
}

}  // namespace stylematch::datagen
