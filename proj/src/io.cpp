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

#include "stylematch/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace stylematch::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'S', 'M', 'W', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("truncated file: " + path);
  return v;
}

bool host_is_little_endian() {
  uint16_t probe = 1;
  uint8_t first;
  std::memcpy(&first, &probe, 1);
  return first == 1;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_weights(
    const std::string& path,
    const std::vector<std::pair<std::string, const Tensor*>>& blocks) {
  if (!host_is_little_endian())
    throw IoError("weight format declares little endianness");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out.write(kMagic, 4);
  put<uint8_t>(out, 1);  // little-endian payload
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, static_cast<uint32_t>(blocks.size()));
  for (const auto& [name, tensor] : blocks) {
    put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<uint32_t>(out, static_cast<uint32_t>(tensor->rank()));
    for (int64_t d : tensor->shape()) put<int64_t>(out, d);
    out.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(tensor->numel() * 8));
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::pair<std::string, Tensor>> read_weights(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a weight file: " + path);
  if (get<uint8_t>(in, path) != 1)
    throw IoError("weight file is not little-endian: " + path);
  if (get<uint32_t>(in, path) != kVersion)
    throw IoError("unsupported weight format version: " + path);
  uint32_t count = get<uint32_t>(in, path);
  std::vector<std::pair<std::string, Tensor>> blocks;
  for (uint32_t b = 0; b < count; ++b) {
    uint32_t name_len = get<uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint32_t rank = get<uint32_t>(in, path);
    std::vector<int64_t> shape;
    for (uint32_t r = 0; r < rank; ++r) shape.push_back(get<int64_t>(in, path));
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * 8));
    if (!in) throw IoError("truncated weight file: " + path);
    blocks.emplace_back(std::move(name), std::move(t));
  }
  return blocks;
}

std::vector<std::pair<std::string, const Tensor*>> named_params(
    const net::BackboneParams& bp, const net::ClassifierParams& cp) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (size_t i = 0; i < bp.convs.size(); ++i) {
    out.emplace_back("backbone.conv" + std::to_string(i) + ".w",
                     &bp.convs[i].w);
    out.emplace_back("backbone.conv" + std::to_string(i) + ".b",
                     &bp.convs[i].b);
  }
  out.emplace_back("backbone.embed.w", &bp.embed_w);
  out.emplace_back("backbone.embed.b", &bp.embed_b);
  out.emplace_back("classifier.w", &cp.w);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> named_params(
    const disc::Params& p) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (size_t i = 0; i < p.convs.size(); ++i) {
    out.emplace_back("disc.conv" + std::to_string(i) + ".w", &p.convs[i].w);
    out.emplace_back("disc.conv" + std::to_string(i) + ".b", &p.convs[i].b);
  }
  for (size_t i = 0; i < p.u.size(); ++i)
    out.emplace_back("disc.u" + std::to_string(i), &p.u[i]);
  out.emplace_back("disc.v", &p.v);
  return out;
}

namespace {

void load_named(const std::string& path,
                std::vector<std::pair<std::string, const Tensor*>> refs) {
  auto blocks = read_weights(path);
  if (blocks.size() != refs.size())
    throw IoError("weight file block count mismatch: " + path);
  for (size_t i = 0; i < refs.size(); ++i) {
    if (blocks[i].first != refs[i].first)
      throw IoError("unexpected weight block '" + blocks[i].first +
                    "' (wanted '" + refs[i].first + "') in " + path);
    Tensor* dst = const_cast<Tensor*>(refs[i].second);
    if (!(dst->shape() == blocks[i].second.shape()))
      throw IoError("weight block shape mismatch for " + refs[i].first);
    *dst = std::move(blocks[i].second);
  }
}

}  // namespace

void load_weights(const std::string& path, net::BackboneParams& bp,
                  net::ClassifierParams& cp) {
  load_named(path, named_params(bp, cp));
}

void load_weights(const std::string& path, disc::Params& p) {
  load_named(path, named_params(p));
}

void write_tensor_container(const std::string& path,
                            const std::vector<Tensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  int64_t count = static_cast<int64_t>(tensors.size());
  int64_t dim = tensors.empty() ? 0 : tensors.front().numel();
  put<int64_t>(out, count);
  put<int64_t>(out, dim);
  std::vector<float> row(static_cast<size_t>(dim));
  for (const Tensor& t : tensors) {
    if (t.numel() != dim)
      throw ShapeError("write_tensor_container: inconsistent element count");
    for (int64_t i = 0; i < dim; ++i)
      row[static_cast<size_t>(i)] = static_cast<float>(t[i]);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Tensor> read_tensor_container(const std::string& path,
                                          const std::vector<int64_t>& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  int64_t count = get<int64_t>(in, path);
  int64_t dim = get<int64_t>(in, path);
  Tensor probe(shape);
  if (probe.numel() != dim)
    throw ShapeError("read_tensor_container: shape does not match dim");
  std::vector<Tensor> out;
  std::vector<float> row(static_cast<size_t>(dim));
  for (int64_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw IoError("truncated container: " + path);
    Tensor t(shape);
    for (int64_t k = 0; k < dim; ++k)
      t[k] = static_cast<double>(row[static_cast<size_t>(k)]);
    out.push_back(std::move(t));
  }
  return out;
}

void write_curves_csv(const std::string& path,
                      const std::vector<net::CurvePoint>& curves) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << "epoch,batch,term,value\n";
  for (const net::CurvePoint& c : curves)
    out << c.epoch << ',' << c.batch << ',' << c.term << ','
        << format_double(c.value) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

namespace {

json primitive_to_json(const datagen::Primitive& p) {
  static const char* kinds[] = {"disc", "ring", "bar"};
  json j;
  j["kind"] = kinds[static_cast<int>(p.kind)];
  j["cx"] = p.cx;
  j["cy"] = p.cy;
  j["radius"] = p.radius;
  j["thickness"] = p.thickness;
  j["angle"] = p.angle;
  j["intensity"] = p.intensity;
  return j;
}

datagen::Primitive primitive_from_json(const json& j) {
  datagen::Primitive p;
  std::string kind = j.at("kind");
  if (kind == "disc")
    p.kind = datagen::Primitive::Kind::Disc;
  else if (kind == "ring")
    p.kind = datagen::Primitive::Kind::Ring;
  else if (kind == "bar")
    p.kind = datagen::Primitive::Kind::Bar;
  else
    throw IoError("manifest: unknown primitive kind " + kind);
  p.cx = j.at("cx");
  p.cy = j.at("cy");
  p.radius = j.at("radius");
  p.thickness = j.at("thickness");
  p.angle = j.at("angle");
  p.intensity = j.at("intensity");
  return p;
}

json identity_to_json(const datagen::IdentitySpec& id) {
  json j;
  j["id"] = id.id;
  j["jitter"] = id.jitter;
  j["primitives"] = json::array();
  for (const auto& p : id.primitives) j["primitives"].push_back(primitive_to_json(p));
  return j;
}

datagen::IdentitySpec identity_from_json(const json& j) {
  datagen::IdentitySpec id;
  id.id = j.at("id");
  id.jitter = j.at("jitter");
  const json& prims = j.at("primitives");
  if (prims.size() != 3) throw IoError("manifest: identity needs 3 primitives");
  for (size_t i = 0; i < 3; ++i)
    id.primitives[i] = primitive_from_json(prims[i]);
  return id;
}

json style_to_json(const datagen::StyleSpec& s) {
  json j;
  j["domain"] = s.domain;
  j["brightness"] = s.brightness;
  j["contrast"] = s.contrast;
  j["texture_amplitude"] = s.texture_amplitude;
  j["blur_radius"] = s.blur_radius;
  return j;
}

datagen::StyleSpec style_from_json(const json& j) {
  datagen::StyleSpec s;
  s.domain = j.at("domain");
  s.brightness = j.at("brightness");
  s.contrast = j.at("contrast");
  s.texture_amplitude = j.at("texture_amplitude");
  s.blur_radius = j.at("blur_radius");
  return s;
}

json template_to_json(const datagen::TemplateDef& t) {
  json j;
  j["id"] = t.id;
  j["subject"] = t.subject;
  j["media"] = t.media;
  return j;
}

datagen::TemplateDef template_from_json(const json& j) {
  datagen::TemplateDef t;
  t.id = j.at("id");
  t.subject = j.at("subject");
  for (const auto& m : j.at("media"))
    t.media.push_back(m.get<std::vector<int64_t>>());
  return t;
}

void write_pair_csv(const std::string& path,
                    const std::vector<datagen::VerificationPair>& pairs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  for (const auto& p : pairs)
    out << p.template_a << ',' << p.template_b << ',' << p.label << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::vector<datagen::VerificationPair> read_pair_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<datagen::VerificationPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    datagen::VerificationPair p;
    if (std::sscanf(line.c_str(), "%" SCNd64 ",%" SCNd64 ",%d", &p.template_a,
                    &p.template_b, &p.label) != 3)
      throw IoError("bad pair line in " + path + ": " + line);
    pairs.push_back(p);
  }
  return pairs;
}

void write_subject_csv(const std::string& path,
                       const std::vector<datagen::TemplateDef>& templates) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  for (const auto& t : templates) out << t.id << ',' << t.subject << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_dataset(const std::string& dir, const datagen::DatasetBundle& ds) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "folds", ec);
  if (ec) throw IoError("cannot create dataset directory: " + dir);

  write_tensor_container((fs::path(dir) / "source_images.bin").string(),
                         ds.source_images);
  write_tensor_container((fs::path(dir) / "target_images.bin").string(),
                         ds.target_images);
  write_pair_csv((fs::path(dir) / "pairs.csv").string(), ds.pairs);
  for (size_t f = 0; f < ds.folds.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "fold_%02zu.csv", f);
    write_pair_csv((fs::path(dir) / "folds" / name).string(), ds.folds[f]);
  }
  write_subject_csv((fs::path(dir) / "gallery.csv").string(),
                    ds.gallery_templates);
  write_subject_csv((fs::path(dir) / "probes_known.csv").string(),
                    ds.known_probe_templates);
  write_subject_csv((fs::path(dir) / "probes_unknown.csv").string(),
                    ds.unknown_probe_templates);

  json manifest;
  manifest["format"] = "stylematch-dataset-v1";
  json cfg;
  cfg["seed"] = ds.config.seed;
  cfg["n_source_identities"] = ds.config.n_source_identities;
  cfg["n_target_identities"] = ds.config.n_target_identities;
  cfg["images_per_source_identity"] = ds.config.images_per_source_identity;
  cfg["images_per_target_identity"] = ds.config.images_per_target_identity;
  cfg["gap"] = ds.config.gap;
  cfg["kfolds"] = ds.config.kfolds;
  manifest["config"] = cfg;
  manifest["files"] = {
      {"source_images", "source_images.bin"},
      {"target_images", "target_images.bin"},
      {"pairs", "pairs.csv"},
      {"gallery", "gallery.csv"},
      {"probes_known", "probes_known.csv"},
      {"probes_unknown", "probes_unknown.csv"},
  };
  manifest["image_shape"] = {1, datagen::kImageSize, datagen::kImageSize};

  json src_ids = json::array(), tgt_ids = json::array();
  for (const auto& id : ds.source_identities)
    src_ids.push_back(identity_to_json(id));
  for (const auto& id : ds.target_identities)
    tgt_ids.push_back(identity_to_json(id));
  manifest["source_identities"] = std::move(src_ids);
  manifest["target_identities"] = std::move(tgt_ids);

  json src_rec = json::array(), tgt_rec = json::array();
  for (const auto& r : ds.source_records) {
    json j;
    j["index"] = r.index;
    j["identity"] = r.identity;
    j["style"] = style_to_json(r.style);
    src_rec.push_back(std::move(j));
  }
  for (const auto& r : ds.target_records) {
    json j;
    j["index"] = r.index;
    j["identity"] = r.identity;
    j["style"] = style_to_json(r.style);
    tgt_rec.push_back(std::move(j));
  }
  manifest["source_images_meta"] = std::move(src_rec);
  manifest["target_images_meta"] = std::move(tgt_rec);

  json tpl = json::array();
  for (const auto& t : ds.templates) tpl.push_back(template_to_json(t));
  manifest["verification_templates"] = std::move(tpl);
  json gal = json::array();
  for (const auto& t : ds.gallery_templates) gal.push_back(template_to_json(t));
  manifest["gallery_templates"] = std::move(gal);
  json kp = json::array();
  for (const auto& t : ds.known_probe_templates)
    kp.push_back(template_to_json(t));
  manifest["known_probe_templates"] = std::move(kp);
  json up = json::array();
  for (const auto& t : ds.unknown_probe_templates)
    up.push_back(template_to_json(t));
  manifest["unknown_probe_templates"] = std::move(up);
  manifest["fold_count"] = ds.folds.size();

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("manifest write failed in " + dir);
}

datagen::DatasetBundle load_dataset(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw IoError("cannot open manifest in " + dir);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw IoError("bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "stylematch-dataset-v1")
    throw IoError("unknown dataset format in " + dir);

  datagen::DatasetBundle ds;
  const json& cfg = manifest.at("config");
  ds.config.seed = cfg.at("seed");
  ds.config.n_source_identities = cfg.at("n_source_identities");
  ds.config.n_target_identities = cfg.at("n_target_identities");
  ds.config.images_per_source_identity = cfg.at("images_per_source_identity");
  ds.config.images_per_target_identity = cfg.at("images_per_target_identity");
  ds.config.gap = cfg.at("gap");
  ds.config.kfolds = cfg.at("kfolds");

  std::vector<int64_t> shape =
      manifest.at("image_shape").get<std::vector<int64_t>>();
  ds.source_images = read_tensor_container(
      (fs::path(dir) / "source_images.bin").string(), shape);
  ds.target_images = read_tensor_container(
      (fs::path(dir) / "target_images.bin").string(), shape);

  for (const auto& j : manifest.at("source_identities"))
    ds.source_identities.push_back(identity_from_json(j));
  for (const auto& j : manifest.at("target_identities"))
    ds.target_identities.push_back(identity_from_json(j));

  for (const auto& j : manifest.at("source_images_meta")) {
    datagen::ImageRecord r;
    r.index = j.at("index");
    r.identity = j.at("identity");
    r.style = style_from_json(j.at("style"));
    ds.source_records.push_back(r);
    ds.source_labels.push_back(r.identity);
  }
  for (const auto& j : manifest.at("target_images_meta")) {
    datagen::ImageRecord r;
    r.index = j.at("index");
    r.identity = j.at("identity");
    r.style = style_from_json(j.at("style"));
    ds.target_records.push_back(r);
    ds.target_subjects.push_back(r.identity);
  }

  for (const auto& j : manifest.at("verification_templates"))
    ds.templates.push_back(template_from_json(j));
  for (const auto& j : manifest.at("gallery_templates"))
    ds.gallery_templates.push_back(template_from_json(j));
  for (const auto& j : manifest.at("known_probe_templates"))
    ds.known_probe_templates.push_back(template_from_json(j));
  for (const auto& j : manifest.at("unknown_probe_templates"))
    ds.unknown_probe_templates.push_back(template_from_json(j));

  ds.pairs = read_pair_csv((fs::path(dir) / "pairs.csv").string());
  size_t fold_count = manifest.at("fold_count");
  for (size_t f = 0; f < fold_count; ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "fold_%02zu.csv", f);
    ds.folds.push_back(
        read_pair_csv((fs::path(dir) / "folds" / name).string()));
  }
  return ds;
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  uint64_t hash = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return hash;
}

}  // namespace stylematch::io
