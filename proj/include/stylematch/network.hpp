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

#include <optional>
#include <string>
#include <vector>

#include "stylematch/discriminator.hpp"
#include "stylematch/layers.hpp"
#include "stylematch/rng.hpp"
#include "stylematch/style.hpp"
#include "stylematch/tensor.hpp"

namespace stylematch::net {

enum class Mode { Baseline, Ps, Sm, PsSm, Mmd };
Mode mode_from_string(const std::string& s);
std::string to_string(Mode mode);

/// Recognition backbone: conv blocks with taps after the first num_taps
/// blocks, flatten, linear embedding, single-matrix classifier.
struct BackboneConfig {
  nn::ConvStackConfig stack;
  int64_t embed_dim = 64;
  int num_taps = 4;
  int64_t num_classes = 0;

  static BackboneConfig desk_default(int64_t num_classes);
  /// 2 conv blocks, D = 8, K = 3, 8x8 inputs: small enough for finite
  /// differences over every parameter.
  static BackboneConfig miniature(int64_t num_classes = 3);
  style::LayerTapSet tap_set(int taps_used) const;
};

struct BackboneParams {
  std::vector<nn::ConvLayer> convs;
  Tensor embed_w;  // D x flat
  Tensor embed_b;  // D
};

struct ClassifierParams {
  Tensor w;  // K x D, no bias (single-layer perceptron + softmax)
};

BackboneParams init_backbone(const BackboneConfig& cfg, Rng& rng);
ClassifierParams init_classifier(const BackboneConfig& cfg, Rng& rng);

struct ForwardResult {
  std::vector<Tensor> taps;  // post-relu maps of tapped blocks
  Tensor embedding;          // D
  Tensor logits;             // K (empty when classifier omitted)
};

struct ForwardTrace {
  nn::StackTrace stack;
  Tensor flat;
};

ForwardResult forward(const Tensor& image, const BackboneConfig& cfg,
                      const BackboneParams& params,
                      const ClassifierParams* classifier,
                      ForwardTrace* trace = nullptr);

/// L_c = -log softmax(logits)[label], stabilized via logsumexp.
double classification_loss(const Tensor& logits, int64_t label);
/// d L_c / d logits = softmax - onehot.
Tensor classification_loss_backward(const Tensor& logits, int64_t label);
Tensor softmax(const Tensor& logits);

struct LabeledImageSet {
  std::vector<Tensor> images;
  std::vector<int64_t> labels;  // empty when unlabeled
};

struct Batch {
  std::vector<Tensor> images;
  std::vector<int64_t> labels;
};

struct ParamGrads {
  nn::ConvGrads conv;
  Tensor embed_w, embed_b;
  Tensor classifier_w;
};
ParamGrads zero_param_grads(const BackboneParams& bp,
                            const ClassifierParams& cp);

struct LossBreakdown {
  double total = 0.0;
  double classification = 0.0;  // weighted mean L_c term as used in `total`
  double style = 0.0;           // L_s (unscaled by lambda)
  double mmd = 0.0;             // MMD value (unscaled by lambda)
  std::vector<double> eps_mu, eps_sigma;
};

/// Everything the reverse pass needs, plus enough to replay the forward.
struct GradTape {
  Mode mode = Mode::Baseline;
  double lambda = 0.0;
  int sinkhorn_budget = 10;
  int taps_used = 0;
  Batch source, target;
  std::vector<double> ps_weights;  // per source image; empty unless PS
  style::StyleEps eps;             // frozen values used by the loss
  std::vector<double> mmd_bandwidths;  // frozen values used by mmd mode
  double recorded_loss = 0.0;
};

struct StyleOptions {
  style::StyleEps* eps = nullptr;  // required for sm modes
  bool update_eps = false;  // apply the Eq.-16 update from this batch first
  bool eps_squared = true;
  // mmd mode: fixed kernel bandwidths; when null they are derived from the
  // current batch and, like eps, treated as constants by the gradient
  const std::vector<double>* mmd_bandwidths = nullptr;
};

/// Composite adaptation objective of the selected mode over one batch pair.
///   baseline: mean L_c                  ps:    mean g(x) L_c
///   sm:       mean L_c + lambda L_s     ps+sm: mean g(x) L_c + lambda L_s
///   mmd:      mean L_c + lambda MMD(embeddings)
/// ps_weights are the frozen discriminator scores of the source images.
LossBreakdown adaptation_loss(const Batch& source, const Batch& target,
                              const BackboneConfig& cfg,
                              const BackboneParams& bp,
                              const ClassifierParams& cp, Mode mode,
                              double lambda, int sinkhorn_budget,
                              int taps_used, const StyleOptions& style_opts,
                              const std::vector<double>* ps_weights,
                              ParamGrads* grads = nullptr,
                              GradTape* tape = nullptr);

/// Recomputes the recorded loss from the tape's stored inputs (bit-exact).
double replay(const GradTape& tape, const BackboneConfig& cfg,
              const BackboneParams& bp, const ClassifierParams& cp);

/// v <- momentum v + grad; param <- param - lr v.
void sgd_step(const std::vector<Tensor*>& params,
              const std::vector<const Tensor*>& grads, double lr,
              double momentum, std::vector<Tensor>& velocity);

std::vector<Tensor*> collect_params(BackboneParams& bp, ClassifierParams& cp);
std::vector<const Tensor*> collect_grads(const ParamGrads& g);

struct TrainConfig {
  Mode mode = Mode::Baseline;
  int batch_size = 32;
  double momentum = 0.9;
  double lambda = 0.01;
  int sinkhorn_budget = 10;
  double eps_momentum = 0.9;
  bool eps_squared = true;
  int taps_used = 2;  // L_f
  // two-phase schedule: baseline at baseline_lr with x0.1 decay twice,
  // then adaptation at adapt_lr
  int baseline_epochs = 12;
  double baseline_lr = 0.01;
  double lr_decay = 0.1;
  int adapt_epochs = 8;
  double adapt_lr = 0.001;
  // fixed-eps variant: when set, eps states are frozen at these values
  std::optional<std::vector<double>> fixed_eps_mu, fixed_eps_sigma;
};

struct CurvePoint {
  int epoch = 0;
  int batch = 0;
  std::string term;
  double value = 0.0;
};

struct TrainResult {
  BackboneParams backbone;
  ClassifierParams classifier;
  std::vector<CurvePoint> curves;
  style::StyleEps eps;
};

/// Phase 1: classification-only training on the labeled source set.
TrainResult train_baseline(const LabeledImageSet& source,
                           const BackboneConfig& cfg, const TrainConfig& tc,
                           Rng& rng);

/// Phase 2: fine-tune a checkpoint in the configured mode at adapt_lr.
/// discriminator is required for PS modes, target images for sm/mmd.
TrainResult adapt(BackboneParams bp, ClassifierParams cp,
                  const LabeledImageSet& source,
                  const std::vector<Tensor>& target_images,
                  const BackboneConfig& cfg, const TrainConfig& tc, Rng& rng,
                  const disc::Config* disc_cfg = nullptr,
                  const disc::Params* disc_params = nullptr);

/// Both phases back to back (0 adaptation epochs leaves phase-1 output).
TrainResult train(const LabeledImageSet& source,
                  const std::vector<Tensor>& target_images,
                  const BackboneConfig& cfg, const TrainConfig& tc, Rng& rng,
                  const disc::Config* disc_cfg = nullptr,
                  const disc::Params* disc_params = nullptr);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

struct EmbedStats {
  MeanSd intra_cos, inter_cos, norm;
  bool inter_defined = false;
};

/// Intra-/inter-class cosine similarity and embedding norms over a labeled
/// embedding set.
EmbedStats embed_stats(const std::vector<Tensor>& embeddings,
                       const std::vector<int64_t>& labels);

}  // namespace stylematch::net
