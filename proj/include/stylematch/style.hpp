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

#include <utility>
#include <vector>

#include "stylematch/sinkhorn.hpp"
#include "stylematch/tensor.hpp"

namespace stylematch::style {

/// Per-channel spatial statistics of one feature map: the image's style at
/// one layer.
struct StyleStats {
  Tensor mu;     // C
  Tensor sigma;  // C, sqrt(population variance + 1e-5)
  int layer = 0;
};

StyleStats style_stats(const Tensor& feature_map, int layer);

/// Chain rule through mu/sigma back onto the map values.
Tensor style_stats_backward(const Tensor& feature_map, const StyleStats& stats,
                            const Tensor& d_mu, const Tensor& d_sigma);

/// Stacks per-image mu / sigma vectors into two empirical measures.
/// Requires n >= 2 (a divergence over one point is degenerate).
std::pair<sinkhorn::Measure, sinkhorn::Measure> style_measures(
    const std::vector<Tensor>& batch_maps, int layer);

/// Which backbone blocks are tapped for adaptation.
struct LayerTapSet {
  std::vector<int> layers;        // tap indices, 1-based
  std::vector<int64_t> channels;  // channel count per tap

  size_t count() const { return layers.size(); }
};

/// One EpsState per tapped layer per statistic (mu and sigma separately;
/// their cost scales differ).
struct StyleEps {
  std::vector<sinkhorn::EpsState> mu, sigma;
};
StyleEps make_style_eps(size_t layer_count, double momentum);

/// taps[layer][image] -> feature map.
using BatchTaps = std::vector<std::vector<Tensor>>;

/// One Eq.-16 momentum update per (layer, statistic) from the current batch.
void update_style_eps(const BatchTaps& source, const BatchTaps& target,
                      const LayerTapSet& taps, StyleEps& eps,
                      bool squared_estimate);

struct StyleLossBreakdown {
  double total = 0.0;
  std::vector<double> mu_term, sigma_term;  // per tapped layer
  std::vector<double> mu_eps, sigma_eps;    // eps values used
};

/// L_s = sum_l  W~(p_mu, q_mu) + W~(p_sigma, q_sigma), with frozen eps
/// values (callers update eps once per batch beforehand).
StyleLossBreakdown style_matching_loss(const BatchTaps& source,
                                       const BatchTaps& target,
                                       const LayerTapSet& taps,
                                       const StyleEps& eps, int budget);

/// Spec-shaped convenience: eps update per Eq. 16 first, then the loss.
StyleLossBreakdown style_matching_loss_update(const BatchTaps& source,
                                              const BatchTaps& target,
                                              const LayerTapSet& taps,
                                              StyleEps& eps, int budget,
                                              bool squared_estimate = true);

struct StyleLossGrads {
  StyleLossBreakdown loss;
  // [layer][image] gradients w.r.t. the tapped feature maps
  std::vector<std::vector<Tensor>> d_source, d_target;
};

StyleLossGrads style_matching_loss_grad(const BatchTaps& source,
                                        const BatchTaps& target,
                                        const LayerTapSet& taps,
                                        const StyleEps& eps, int budget);

/// Multi-kernel squared MMD with Gaussian kernels exp(-d^2 / bw^2), one term
/// per bandwidth, diagonal included (V-statistic).
double mmd_loss(const sinkhorn::Measure& p, const sinkhorn::Measure& q,
                const std::vector<double>& bandwidths);

struct MmdGrad {
  double value = 0.0;
  Tensor grad_p, grad_q;
};
MmdGrad mmd_loss_grad(const sinkhorn::Measure& p, const sinkhorn::Measure& q,
                      const std::vector<double>& bandwidths);

/// Per-batch mean pairwise cost scaled by {0.5, 1, 2}.
std::vector<double> default_bandwidths(const sinkhorn::Measure& p,
                                       const sinkhorn::Measure& q);

}  // namespace stylematch::style
