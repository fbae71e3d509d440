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

#include <vector>

#include "stylematch/rng.hpp"
#include "stylematch/tensor.hpp"

namespace stylematch::nn {

// A block is [optional 2x2 mean pool] -> 3x3 same conv -> relu.  Pooling
// (not conv stride) does the downsampling: the conv contract demands
// integral output extents, and an odd kernel at stride 2 can never produce
// one from the even extents this pipeline uses.
struct BlockSpec {
  int64_t out_channels = 0;
  bool pool = false;
};

struct ConvLayer {
  Tensor w;  // Cout x Cin x k x k
  Tensor b;  // Cout
  int64_t stride = 1;
  int64_t padding = 1;
};

struct ConvStackConfig {
  int64_t in_channels = 1;
  int64_t in_h = 32;
  int64_t in_w = 32;
  int64_t kernel = 3;
  std::vector<BlockSpec> blocks;

  int64_t layer_count() const { return static_cast<int64_t>(blocks.size()); }
  /// Spatial extent after block i (0-based), assuming same-padding conv.
  std::pair<int64_t, int64_t> extent_after(int64_t i) const;
  int64_t flat_size() const;  // channels*h*w after the last block
};

/// Forward intermediates for one image; enough to replay and to backprop.
struct StackTrace {
  Tensor input;
  std::vector<Tensor> pooled;  // block input after the optional pool
  std::vector<Tensor> pre;     // post-conv+bias, pre-relu
  std::vector<Tensor> act;     // post-relu == block output
};

std::vector<ConvLayer> init_conv_stack(const ConvStackConfig& cfg, Rng& rng);

/// Returns the last block's activation; records intermediates when trace
/// is given (relu after every conv).
Tensor conv_stack_forward(const Tensor& image, const ConvStackConfig& cfg,
                          const std::vector<ConvLayer>& layers,
                          StackTrace* trace);

struct ConvGrads {
  std::vector<Tensor> dw, db;
};
ConvGrads zero_conv_grads(const std::vector<ConvLayer>& layers);

/// Reverse pass.  d_act[i] is the gradient arriving at block i's activation
/// from outside the stack (taps, heads); entries may be empty tensors.
/// The (i+1)-th block's input gradient is added internally.  Accumulates
/// into grads and returns d input.
Tensor conv_stack_backward(const ConvStackConfig& cfg,
                           const std::vector<ConvLayer>& layers,
                           const StackTrace& trace,
                           const std::vector<Tensor>& d_act, ConvGrads& grads);

// ---- single conv layer pieces (used by the stack) ----
Tensor pad_spatial(const Tensor& map, int64_t padding);
Tensor mean_pool2(const Tensor& map);
Tensor mean_pool2_backward(const Tensor& d_out, int64_t in_h, int64_t in_w);
Tensor conv_layer_forward(const Tensor& input, const ConvLayer& layer);
/// dpre -> (dw, db accumulated), returns d input.
Tensor conv_layer_backward(const Tensor& input, const ConvLayer& layer,
                           const Tensor& dpre, Tensor& dw, Tensor& db);

// ---- dense head pieces ----
/// y = W x + b, W is [out x in].
Tensor linear_forward(const Tensor& w, const Tensor& b, const Tensor& x);
/// Accumulates dw, db; returns dx.
Tensor linear_backward(const Tensor& w, const Tensor& x, const Tensor& dy,
                       Tensor& dw, Tensor& db);

}  // namespace stylematch::nn
