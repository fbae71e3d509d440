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

// Batch front end: datagen / train / train-discriminator / eval / ablation /
// sinkhorn-check over a flat key=value config, with a few override flags.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "stylematch/config.hpp"
#include "stylematch/runner.hpp"

using stylematch::config::RunConfig;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string mode;
  int64_t seed = -1;
  int lf = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--seed", flags.seed, "override seed");
  cmd->add_option("--mode", flags.mode,
                  "override train.mode (baseline|ps|sm|ps+sm|mmd)");
  cmd->add_option("--lf", flags.lf, "override adaptation tap count L_f");
  cmd->add_option("--out", flags.out_dir, "override output directory");
}

RunConfig resolve(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty())
    cfg = stylematch::config::load_config_file(flags.config_path);
  if (flags.seed >= 0) cfg.seed = static_cast<uint64_t>(flags.seed);
  if (!flags.mode.empty())
    cfg.train.mode = stylematch::net::mode_from_string(flags.mode);
  if (flags.lf > 0) cfg.train.taps_used = flags.lf;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"style-based domain adaptation toolkit"};
  app.require_subcommand(1);

  const char* names[] = {"datagen", "train", "train-discriminator",
                         "eval", "ablation", "sinkhorn-check"};
  const char* descriptions[] = {
      "generate the synthetic two-domain dataset and its protocols",
      "train (baseline phase + adaptation in the configured mode)",
      "train the domain discriminator on source-vs-target images",
      "extract embeddings, fuse templates, run all protocols",
      "train and evaluate every mode from one shared baseline",
      "run the transport oracle suite and print pass/fail"};

  CommonFlags flags[6];
  CLI::App* cmds[6];
  for (int i = 0; i < 6; ++i) {
    cmds[i] = app.add_subcommand(names[i], descriptions[i]);
    add_common(cmds[i], flags[i]);
  }

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 6; ++i) {
    if (!cmds[i]->parsed()) continue;
    try {
      RunConfig cfg = resolve(flags[i]);
      return stylematch::runner::run_command(names[i], cfg);
    } catch (const stylematch::IoError& e) {
      std::fprintf(stderr, "io error: %s\n", e.what());
      return 3;
    } catch (const stylematch::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    }
  }
  return 2;
}
