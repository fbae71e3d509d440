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

#include <string>
#include <vector>

#include "stylematch/config.hpp"
#include "stylematch/datagen.hpp"
#include "stylematch/discriminator.hpp"
#include "stylematch/eval.hpp"
#include "stylematch/network.hpp"

namespace stylematch::runner {

inline const std::vector<double> kFprLevels = {1e-4, 1e-3, 1e-2, 1e-1};
inline const std::vector<double> kFpirLevels = {1e-2, 1e-1};
inline const std::vector<int> kRanks = {1, 10};

struct EvalReport {
  std::vector<eval::RatePoint> tpr;   // at kFprLevels
  eval::KfoldResult kfold;
  std::vector<double> rank_accuracy;  // at kRanks
  std::vector<eval::RatePoint> tpir;  // at kFpirLevels
  net::EmbedStats embed;

  double tpr_at(double level) const;
  double tpir_at(double level) const;
};

std::vector<Tensor> extract_embeddings(const std::vector<Tensor>& images,
                                       const net::BackboneConfig& cfg,
                                       const net::BackboneParams& params);

/// Runs all four protocols plus embedding statistics for one model over the
/// dataset's target protocols.
EvalReport evaluate_model(const datagen::DatasetBundle& ds,
                          const net::BackboneConfig& cfg,
                          const net::BackboneParams& bp,
                          const net::ClassifierParams& cp);

void write_report(const EvalReport& report, const std::string& csv_path,
                  const std::string& json_path);

struct AblationRow {
  std::string label;  // mode, possibly with lf suffix
  EvalReport report;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  uint64_t baseline_weights_hash = 0;
  net::TrainResult baseline;
};

/// Trains the shared baseline once, forks adaptation per mode, evaluates
/// everything.  Writes weights/curves/reports/table under out_dir.
AblationResult run_ablation(const datagen::DatasetBundle& ds,
                            const config::RunConfig& cfg,
                            const std::string& out_dir);

// ---- CLI commands (exit-code contract: 0 ok, 2 config, 3 io, 4 numeric) ----
int cmd_datagen(const config::RunConfig& cfg);
int cmd_train(const config::RunConfig& cfg);
int cmd_train_discriminator(const config::RunConfig& cfg);
int cmd_eval(const config::RunConfig& cfg);
int cmd_ablation(const config::RunConfig& cfg);
int cmd_sinkhorn_check(uint64_t seed, bool verbose);

int run_command(const std::string& command, const config::RunConfig& cfg);

}  // namespace stylematch::runner
