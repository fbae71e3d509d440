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

#include "stylematch/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "stylematch/io.hpp"

namespace stylematch::config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: bad unsigned integer for " + key + ": " + v);
  return out;
}

int64_t to_i64(const std::string& key, const std::string& v) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: bad integer for " + key + ": " + v);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: bad real for " + key + ": " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: bad boolean for " + key + ": " + v);
}

std::vector<double> to_double_list(const std::string& key,
                                   const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

std::string from_double_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += io::format_double(v[i]);
  }
  return out;
}

std::vector<std::string> to_string_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(trim(item));
  return out;
}

std::string from_string_list(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += v[i];
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> RunConfig::as_map() const {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  kv["out"] = out_dir;
  kv["data"] = data_dir;
  kv["weights"] = weights;
  kv["disc.weights"] = disc_weights;

  kv["dataset.n_source_ids"] = std::to_string(dataset.n_source_identities);
  kv["dataset.n_target_ids"] = std::to_string(dataset.n_target_identities);
  kv["dataset.images_per_source_id"] =
      std::to_string(dataset.images_per_source_identity);
  kv["dataset.images_per_target_id"] =
      std::to_string(dataset.images_per_target_identity);
  kv["dataset.gap"] = io::format_double(dataset.gap);
  kv["dataset.kfolds"] = std::to_string(dataset.kfolds);

  kv["train.mode"] = net::to_string(train.mode);
  kv["train.batch_size"] = std::to_string(train.batch_size);
  kv["train.momentum"] = io::format_double(train.momentum);
  kv["train.lambda"] = io::format_double(train.lambda);
  kv["train.sinkhorn_budget"] = std::to_string(train.sinkhorn_budget);
  kv["train.eps_momentum"] = io::format_double(train.eps_momentum);
  kv["train.eps_squared"] = train.eps_squared ? "true" : "false";
  kv["train.lf"] = std::to_string(train.taps_used);
  kv["train.baseline_epochs"] = std::to_string(train.baseline_epochs);
  kv["train.baseline_lr"] = io::format_double(train.baseline_lr);
  kv["train.lr_decay"] = io::format_double(train.lr_decay);
  kv["train.adapt_epochs"] = std::to_string(train.adapt_epochs);
  kv["train.adapt_lr"] = io::format_double(train.adapt_lr);
  if (train.fixed_eps_mu)
    kv["train.fixed_eps_mu"] = from_double_list(*train.fixed_eps_mu);
  if (train.fixed_eps_sigma)
    kv["train.fixed_eps_sigma"] = from_double_list(*train.fixed_eps_sigma);

  kv["disc.epochs"] = std::to_string(disc.epochs);
  kv["disc.lr"] = io::format_double(disc.lr);
  kv["disc.momentum"] = io::format_double(disc.momentum);
  kv["disc.batch_pairs"] = std::to_string(disc.batch_pairs);

  kv["ablation.modes"] = from_string_list(ablation_modes);
  kv["ablation.lf_sweep"] = ablation_lf_sweep ? "true" : "false";
  return kv;
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  for (const auto& [key, value] : kv) {
    if (key == "seed")
      cfg.seed = to_u64(key, value);
    else if (key == "out")
      cfg.out_dir = value;
    else if (key == "data")
      cfg.data_dir = value;
    else if (key == "weights")
      cfg.weights = value;
    else if (key == "disc.weights")
      cfg.disc_weights = value;
    else if (key == "dataset.n_source_ids")
      cfg.dataset.n_source_identities = to_i64(key, value);
    else if (key == "dataset.n_target_ids")
      cfg.dataset.n_target_identities = to_i64(key, value);
    else if (key == "dataset.images_per_source_id")
      cfg.dataset.images_per_source_identity = to_i64(key, value);
    else if (key == "dataset.images_per_target_id")
      cfg.dataset.images_per_target_identity = to_i64(key, value);
    else if (key == "dataset.gap")
      cfg.dataset.gap = to_double(key, value);
    else if (key == "dataset.kfolds")
      cfg.dataset.kfolds = static_cast<int>(to_i64(key, value));
    else if (key == "train.mode")
      cfg.train.mode = net::mode_from_string(value);
    else if (key == "train.batch_size")
      cfg.train.batch_size = static_cast<int>(to_i64(key, value));
    else if (key == "train.momentum")
      cfg.train.momentum = to_double(key, value);
    else if (key == "train.lambda")
      cfg.train.lambda = to_double(key, value);
    else if (key == "train.sinkhorn_budget")
      cfg.train.sinkhorn_budget = static_cast<int>(to_i64(key, value));
    else if (key == "train.eps_momentum")
      cfg.train.eps_momentum = to_double(key, value);
    else if (key == "train.eps_squared")
      cfg.train.eps_squared = to_bool(key, value);
    else if (key == "train.lf")
      cfg.train.taps_used = static_cast<int>(to_i64(key, value));
    else if (key == "train.baseline_epochs")
      cfg.train.baseline_epochs = static_cast<int>(to_i64(key, value));
    else if (key == "train.baseline_lr")
      cfg.train.baseline_lr = to_double(key, value);
    else if (key == "train.lr_decay")
      cfg.train.lr_decay = to_double(key, value);
    else if (key == "train.adapt_epochs")
      cfg.train.adapt_epochs = static_cast<int>(to_i64(key, value));
    else if (key == "train.adapt_lr")
      cfg.train.adapt_lr = to_double(key, value);
    else if (key == "train.fixed_eps_mu")
      cfg.train.fixed_eps_mu = to_double_list(key, value);
    else if (key == "train.fixed_eps_sigma")
      cfg.train.fixed_eps_sigma = to_double_list(key, value);
    else if (key == "disc.epochs")
      cfg.disc.epochs = static_cast<int>(to_i64(key, value));
    else if (key == "disc.lr")
      cfg.disc.lr = to_double(key, value);
    else if (key == "disc.momentum")
      cfg.disc.momentum = to_double(key, value);
    else if (key == "disc.batch_pairs")
      cfg.disc.batch_pairs = static_cast<int>(to_i64(key, value));
    else if (key == "ablation.modes")
      cfg.ablation_modes = to_string_list(value);
    else if (key == "ablation.lf_sweep")
      cfg.ablation_lf_sweep = to_bool(key, value);
    else
      throw ConfigError("config: unknown key '" + key + "'");
  }
  return cfg;
}

bool RunConfig::operator==(const RunConfig& other) const {
  return as_map() == other.as_map();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not key=value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at line " + std::to_string(lineno));
    if (kv.count(key))
      throw ConfigError("config: duplicate key " + key);
    kv[key] = value;
  }
  return kv;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return RunConfig::from_map(parse_config_text(buf.str()));
}

void echo_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config echo: " + path);
  out << "# resolved configuration\n";
  for (const auto& [key, value] : cfg.as_map())
    out << key << '=' << value << '\n';
  if (!out) throw IoError("config echo write failed: " + path);
}

}  // namespace stylematch::config
