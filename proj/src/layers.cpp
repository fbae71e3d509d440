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

#include "stylematch/layers.hpp"

#include <cmath>
#include <cstring>

#include "stylematch/kernels.hpp"

namespace stylematch::nn {

std::pair<int64_t, int64_t> ConvStackConfig::extent_after(int64_t i) const {
  int64_t h = in_h, w = in_w;
  for (int64_t l = 0; l <= i; ++l) {
    if (blocks[static_cast<size_t>(l)].pool) {
      h /= 2;
      w /= 2;
    }
    // same-padded 3x3 conv keeps the extent
  }
  return {h, w};
}

int64_t ConvStackConfig::flat_size() const {
  auto [h, w] = extent_after(layer_count() - 1);
  return blocks.back().out_channels * h * w;
}

std::vector<ConvLayer> init_conv_stack(const ConvStackConfig& cfg, Rng& rng) {
  std::vector<ConvLayer> layers;
  int64_t cin = cfg.in_channels;
  for (size_t i = 0; i < cfg.blocks.size(); ++i) {
    const BlockSpec& spec = cfg.blocks[i];
    ConvLayer layer;
    layer.stride = 1;
    layer.padding = (cfg.kernel - 1) / 2;
    layer.w = Tensor({spec.out_channels, cin, cfg.kernel, cfg.kernel});
    layer.b = Tensor({spec.out_channels});
    Rng wrng = rng.split(1000 + static_cast<uint64_t>(i));
    double scale =
        std::sqrt(2.0 / static_cast<double>(cin * cfg.kernel * cfg.kernel));
    for (auto& v : layer.w.values()) v = scale * wrng.gaussian();
    layers.push_back(std::move(layer));
    cin = spec.out_channels;
  }
  return layers;
}

Tensor pad_spatial(const Tensor& map, int64_t padding) {
  const int64_t c = map.dim(0), h = map.dim(1), w = map.dim(2);
  Tensor out({c, h + 2 * padding, w + 2 * padding});
  const int64_t pw = w + 2 * padding, ph = h + 2 * padding;
  for (int64_t ci = 0; ci < c; ++ci)
    for (int64_t y = 0; y < h; ++y)
      std::memcpy(out.data() + (ci * ph + y + padding) * pw + padding,
                  map.data() + (ci * h + y) * w,
                  static_cast<size_t>(w) * sizeof(double));
  return out;
}

Tensor conv_layer_forward(const Tensor& input, const ConvLayer& layer) {
  Tensor out = conv2d(input, layer.w, layer.stride, layer.padding);
  const int64_t cout = out.dim(0), hw = out.dim(1) * out.dim(2);
  for (int64_t co = 0; co < cout; ++co) {
    double bias = layer.b[co];
    double* plane = out.data() + co * hw;
    for (int64_t i = 0; i < hw; ++i) plane[i] += bias;
  }
  return out;
}

Tensor conv_layer_backward(const Tensor& input, const ConvLayer& layer,
                           const Tensor& dpre, Tensor& dw, Tensor& db) {
  const int64_t k = layer.w.dim(2);
  const int64_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int64_t cout = dpre.dim(0), oh = dpre.dim(1), ow = dpre.dim(2);
  const int64_t pad = layer.padding, stride = layer.stride;

  // bias: sum over spatial positions
  for (int64_t co = 0; co < cout; ++co) {
    double acc = 0.0;
    const double* plane = dpre.data() + co * oh * ow;
    for (int64_t i = 0; i < oh * ow; ++i) acc += plane[i];
    db[co] += acc;
  }

  // weights: correlation of padded input with dpre
  Tensor padded = pad_spatial(input, pad);
  kernels::ops().conv2d_grad_weights(
      padded.data(), static_cast<size_t>(cin),
      static_cast<size_t>(h + 2 * pad), static_cast<size_t>(w + 2 * pad),
      dpre.data(), static_cast<size_t>(cout), static_cast<size_t>(oh),
      static_cast<size_t>(ow), static_cast<size_t>(k),
      static_cast<size_t>(stride), dw.data());

  // input: correlation of the zero-upsampled dpre with the flipped kernel.
  const int64_t uh = (oh - 1) * stride + 1, uw = (ow - 1) * stride + 1;
  const int64_t ph = uh + 2 * (k - 1), pw = uw + 2 * (k - 1);
  Tensor up({cout, ph, pw});
  for (int64_t co = 0; co < cout; ++co)
    for (int64_t oy = 0; oy < oh; ++oy)
      for (int64_t ox = 0; ox < ow; ++ox)
        up.at(co, oy * stride + (k - 1), ox * stride + (k - 1)) =
            dpre.at(co, oy, ox);

  Tensor wflip({cin, cout, k, k});
  for (int64_t co = 0; co < cout; ++co)
    for (int64_t ci = 0; ci < cin; ++ci)
      for (int64_t ky = 0; ky < k; ++ky)
        for (int64_t kx = 0; kx < k; ++kx)
          wflip.at(ci, co, ky, kx) = layer.w.at(co, ci, k - 1 - ky, k - 1 - kx);

  // full-size gradient of the padded input, then crop the padding margin
  const int64_t gh = ph - k + 1, gw = pw - k + 1;  // = h + 2*pad
  Tensor dpad({cin, gh, gw});
  kernels::ops().conv2d_padded(up.data(), static_cast<size_t>(cout),
                               static_cast<size_t>(ph),
                               static_cast<size_t>(pw), wflip.data(),
                               static_cast<size_t>(cin), static_cast<size_t>(k),
                               1, dpad.data(), static_cast<size_t>(gh),
                               static_cast<size_t>(gw));
  Tensor din({cin, h, w});
  for (int64_t ci = 0; ci < cin; ++ci)
    for (int64_t y = 0; y < h; ++y)
      std::memcpy(din.data() + (ci * h + y) * w,
                  dpad.data() + (ci * gh + y + pad) * gw + pad,
                  static_cast<size_t>(w) * sizeof(double));
  return din;
}

Tensor mean_pool2(const Tensor& map) {
  const int64_t c = map.dim(0), h = map.dim(1), w = map.dim(2);
  if (h % 2 != 0 || w % 2 != 0)
    throw ShapeError("mean_pool2: extent must be even");
  Tensor out({c, h / 2, w / 2});
  for (int64_t ci = 0; ci < c; ++ci)
    for (int64_t y = 0; y < h / 2; ++y)
      for (int64_t x = 0; x < w / 2; ++x)
        out.at(ci, y, x) =
            0.25 * (map.at(ci, 2 * y, 2 * x) + map.at(ci, 2 * y, 2 * x + 1) +
                    map.at(ci, 2 * y + 1, 2 * x) +
                    map.at(ci, 2 * y + 1, 2 * x + 1));
  return out;
}

Tensor mean_pool2_backward(const Tensor& d_out, int64_t in_h, int64_t in_w) {
  const int64_t c = d_out.dim(0);
  Tensor din({c, in_h, in_w});
  for (int64_t ci = 0; ci < c; ++ci)
    for (int64_t y = 0; y < d_out.dim(1); ++y)
      for (int64_t x = 0; x < d_out.dim(2); ++x) {
        double g = 0.25 * d_out.at(ci, y, x);
        din.at(ci, 2 * y, 2 * x) = g;
        din.at(ci, 2 * y, 2 * x + 1) = g;
        din.at(ci, 2 * y + 1, 2 * x) = g;
        din.at(ci, 2 * y + 1, 2 * x + 1) = g;
      }
  return din;
}

Tensor conv_stack_forward(const Tensor& image, const ConvStackConfig& cfg,
                          const std::vector<ConvLayer>& layers,
                          StackTrace* trace) {
  if (image.rank() != 3 || image.dim(0) != cfg.in_channels ||
      image.dim(1) != cfg.in_h || image.dim(2) != cfg.in_w)
    throw ShapeError("conv_stack_forward: image shape mismatch");
  if (trace) {
    trace->input = image;
    trace->pooled.clear();
    trace->pre.clear();
    trace->act.clear();
  }
  Tensor x = image;
  for (size_t li = 0; li < layers.size(); ++li) {
    if (cfg.blocks[li].pool) x = mean_pool2(x);
    if (trace) trace->pooled.push_back(x);
    Tensor pre = conv_layer_forward(x, layers[li]);
    Tensor act(pre.shape());
    kernels::ops().relu(pre.data(), act.data(),
                        static_cast<size_t>(pre.numel()));
    if (trace) {
      trace->pre.push_back(pre);
      trace->act.push_back(act);
    }
    x = std::move(act);
  }
  return x;
}

ConvGrads zero_conv_grads(const std::vector<ConvLayer>& layers) {
  ConvGrads g;
  for (const ConvLayer& layer : layers) {
    g.dw.emplace_back(layer.w.shape());
    g.db.emplace_back(layer.b.shape());
  }
  return g;
}

Tensor conv_stack_backward(const ConvStackConfig& cfg,
                           const std::vector<ConvLayer>& layers,
                           const StackTrace& trace,
                           const std::vector<Tensor>& d_act,
                           ConvGrads& grads) {
  const int64_t L = cfg.layer_count();
  // Layers above the highest incoming gradient see only zeros; skip them.
  int64_t top = -1;
  for (int64_t li = L - 1; li >= 0 && top < 0; --li)
    if (static_cast<size_t>(li) < d_act.size() &&
        d_act[static_cast<size_t>(li)].numel() > 0)
      top = li;
  if (top < 0) return Tensor();
  Tensor g;  // gradient flowing into act of the current layer
  for (int64_t li = top; li >= 0; --li) {
    const Tensor& act = trace.act[static_cast<size_t>(li)];
    if (g.numel() == 0) g = Tensor(act.shape());
    if (static_cast<size_t>(li) < d_act.size() &&
        d_act[static_cast<size_t>(li)].numel() > 0)
      add_scaled(g, 1.0, d_act[static_cast<size_t>(li)]);
    Tensor dpre(g.shape());
    kernels::ops().relu_backward(trace.pre[static_cast<size_t>(li)].data(),
                                 g.data(), dpre.data(),
                                 static_cast<size_t>(g.numel()));
    const Tensor& input = trace.pooled[static_cast<size_t>(li)];
    g = conv_layer_backward(input, layers[static_cast<size_t>(li)], dpre,
                            grads.dw[static_cast<size_t>(li)],
                            grads.db[static_cast<size_t>(li)]);
    if (cfg.blocks[static_cast<size_t>(li)].pool) {
      const Tensor& pre_pool =
          li == 0 ? trace.input : trace.act[static_cast<size_t>(li - 1)];
      g = mean_pool2_backward(g, pre_pool.dim(1), pre_pool.dim(2));
    }
  }
  return g;
}

Tensor linear_forward(const Tensor& w, const Tensor& b, const Tensor& x) {
  const int64_t out = w.dim(0), in = w.dim(1);
  if (x.numel() != in) throw ShapeError("linear_forward: input size mismatch");
  Tensor y({out});
  kernels::ops().matmul(w.data(), x.data(), y.data(),
                        static_cast<size_t>(out), static_cast<size_t>(in), 1,
                        false);
  if (b.numel() > 0) {
    kernels::ops().add(y.data(), b.data(), y.data(),
                       static_cast<size_t>(out));
  }
  return y;
}

Tensor linear_backward(const Tensor& w, const Tensor& x, const Tensor& dy,
                       Tensor& dw, Tensor& db) {
  const int64_t out = w.dim(0), in = w.dim(1);
  // dw += dy (outer) x
  for (int64_t o = 0; o < out; ++o)
    kernels::ops().axpy(dy[o], x.data(), dw.data() + o * in,
                        static_cast<size_t>(in));
  if (db.numel() > 0)
    kernels::ops().add(db.data(), dy.data(), db.data(),
                       static_cast<size_t>(out));
  // dx = W^T dy
  Tensor dx({in});
  for (int64_t o = 0; o < out; ++o)
    kernels::ops().axpy(dy[o], w.data() + o * in, dx.data(),
                        static_cast<size_t>(in));
  return dx;
}

}  // namespace stylematch::nn
