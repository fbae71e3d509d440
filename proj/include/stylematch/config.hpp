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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylematch/datagen.hpp"
#include "stylematch/discriminator.hpp"
#include "stylematch/network.hpp"

namespace stylematch::config {

/// Flat key=value run configuration ('#' comments, unknown keys rejected).
struct RunConfig {
  uint64_t seed = 1;
  std::string out_dir = "out";
  std::string data_dir;      // dataset location for train/eval
  std::string weights;       // model weights for eval
  std::string disc_weights;  // discriminator weights for ps modes

  datagen::GenerateConfig dataset;
  net::TrainConfig train;
  disc::TrainConfig disc;

  std::vector<std::string> ablation_modes = {"baseline", "ps", "sm", "ps+sm",
                                             "mmd"};
  bool ablation_lf_sweep = false;

  std::map<std::string, std::string> as_map() const;
  static RunConfig from_map(const std::map<std::string, std::string>& kv);
  bool operator==(const RunConfig& other) const;
};

std::map<std::string, std::string> parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);
void echo_config(const RunConfig& cfg, const std::string& path);

}  // namespace stylematch::config
