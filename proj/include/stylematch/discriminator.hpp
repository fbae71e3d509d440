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

#include "stylematch/layers.hpp"
#include "stylematch/rng.hpp"
#include "stylematch/tensor.hpp"

namespace stylematch::disc {

/// Domain discriminator g(x): small conv backbone tapped after every block,
/// channel-unit-normalized taps, learned per-channel weights u^l, spatial
/// averaging to one scalar per layer, then sigmoid(v^T r).
struct Config {
  nn::ConvStackConfig stack;  // default four stride-2 blocks 8/16/32/64

  int64_t tap_count() const { return stack.layer_count(); }
  static Config desk_default(int64_t in_h = 32, int64_t in_w = 32);
};

struct Params {
  std::vector<nn::ConvLayer> convs;
  std::vector<Tensor> u;  // per tap, length C_l
  Tensor v;               // L_g
};

/// u starts at small positive values, v at zero so that g == 0.5.
Params init_params(const Config& cfg, Rng& rng);

/// At every spatial site the channel vector is divided by its Euclidean
/// norm (+1e-10 floor); zero vectors map to zero.
Tensor unit_normalize(const Tensor& map);
Tensor unit_normalize_backward(const Tensor& map, const Tensor& d_norm);

/// r^l: spatial mean of <u, normalized channel vector>.
double perceptual_scalar(const Tensor& norm_map, const Tensor& u);

struct ScoreTrace {
  nn::StackTrace stack;
  std::vector<Tensor> norm;  // unit-normalized taps
  Tensor r;                  // L_g
  double logit = 0.0;
  double score = 0.0;
};

double score(const Tensor& image, const Config& cfg, const Params& params,
             ScoreTrace* trace = nullptr);

/// Eq. 4: g(x_s)^2 + (g(x_t) - 1)^2 for one source/target pair.
double domain_loss(double source_score, double target_score);

/// Eq. 5: the PS-weighted classification loss; the score is a constant
/// w.r.t. backbone gradients.
double weight_classification(double score, double lc);

struct Grads {
  nn::ConvGrads conv;
  std::vector<Tensor> u;
  Tensor v;
};
Grads zero_grads(const Params& params);

/// Accumulates d loss / d params given d loss / d score.
void score_backward(const Config& cfg, const Params& params,
                    const ScoreTrace& trace, double d_score, Grads& grads);

struct TrainConfig {
  double lr = 0.1;
  double momentum = 0.9;
  int batch_pairs = 16;
  int epochs = 20;
};

struct TrainResult {
  Params params;
  std::vector<double> loss_per_epoch;
};

/// SGD+momentum on batch-mean domain loss over equally sampled
/// source/target pairs; u clamped nonnegative after each step.
TrainResult train_discriminator(const std::vector<Tensor>& source,
                                const std::vector<Tensor>& target,
                                const Config& cfg, const TrainConfig& tc,
                                Rng& rng);

/// Mann-Whitney AUC of target-vs-source separation (ties at midrank).
double auc(const std::vector<double>& source_scores,
           const std::vector<double>& target_scores);

/// Fixed-width bins over [0,1]; score 1.0 lands in the last bin, interior
/// boundaries belong to the upper bin.  With weights, each score
/// contributes its weight instead of 1.
struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<double> mass;   // bins
};
Histogram score_histogram(const std::vector<double>& scores,
                          const std::vector<double>* weights, int bins);

/// CSV rows: image id, domain label, score.
void export_scores_csv(const std::string& path,
                       const std::vector<std::string>& ids,
                       const std::vector<std::string>& domains,
                       const std::vector<double>& scores);

}  // namespace stylematch::disc
