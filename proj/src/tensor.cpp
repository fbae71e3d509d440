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

#include "stylematch/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "stylematch/kernels.hpp"

namespace stylematch {
namespace {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t e : shape) {
    if (e < 0) throw ShapeError("negative extent in tensor shape");
    n *= e;
  }
  return n;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch");
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape, double fill)
    : shape_(std::move(shape)),
      data_(static_cast<size_t>(shape_numel(shape_)), fill) {}

Tensor Tensor::from_values(std::vector<int64_t> shape,
                           std::vector<double> values) {
  Tensor t;
  if (shape_numel(shape) != static_cast<int64_t>(values.size()))
    throw ShapeError("from_values: extent product != value count");
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

Tensor Tensor::reshaped(std::vector<int64_t> shape) const {
  if (shape_numel(shape) != numel())
    throw ShapeError("reshaped: extent product mismatch");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite())
    throw NumericError(std::string(what) + ": non-finite value");
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  kernels::ops().add(a.data(), b.data(), out.data(),
                     static_cast<size_t>(a.numel()));
  require_finite(out, "add");
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  kernels::ops().sub(a.data(), b.data(), out.data(),
                     static_cast<size_t>(a.numel()));
  require_finite(out, "sub");
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  kernels::ops().mul(a.data(), b.data(), out.data(),
                     static_cast<size_t>(a.numel()));
  require_finite(out, "mul");
  return out;
}

Tensor scaled(const Tensor& a, double alpha) {
  Tensor out(a.shape());
  kernels::ops().scale(alpha, a.data(), out.data(),
                       static_cast<size_t>(a.numel()));
  require_finite(out, "scaled");
  return out;
}

void add_scaled(Tensor& y, double alpha, const Tensor& x) {
  require_same_shape(y, x, "add_scaled");
  kernels::ops().axpy(alpha, x.data(), y.data(),
                      static_cast<size_t>(y.numel()));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul: operands must be rank 2");
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul: inner extents disagree");
  Tensor out({a.dim(0), b.dim(1)});
  kernels::ops().matmul(a.data(), b.data(), out.data(),
                        static_cast<size_t>(a.dim(0)),
                        static_cast<size_t>(a.dim(1)),
                        static_cast<size_t>(b.dim(1)), false);
  require_finite(out, "matmul");
  return out;
}

Tensor transposed(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transposed: rank 2 required");
  Tensor out({a.dim(1), a.dim(0)});
  for (int64_t i = 0; i < a.dim(0); ++i)
    for (int64_t j = 0; j < a.dim(1); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernels_t, int64_t stride,
              int64_t padding) {
  if (input.rank() != 3) throw ShapeError("conv2d: input must be C x H x W");
  if (kernels_t.rank() != 4)
    throw ShapeError("conv2d: kernels must be Cout x Cin x k x k");
  const int64_t cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int64_t cout = kernels_t.dim(0), k = kernels_t.dim(2);
  if (kernels_t.dim(1) != cin)
    throw ShapeError("conv2d: kernel input channels disagree with input");
  if (kernels_t.dim(3) != k) throw ShapeError("conv2d: kernel must be square");
  if (k % 2 == 0) throw ShapeError("conv2d: kernel extent must be odd");
  if (stride < 1 || padding < 0) throw ShapeError("conv2d: bad stride/padding");
  if ((h + 2 * padding - k) % stride != 0 ||
      (w + 2 * padding - k) % stride != 0)
    throw ShapeError("conv2d: non-integral output extent");
  const int64_t oh = (h + 2 * padding - k) / stride + 1;
  const int64_t ow = (w + 2 * padding - k) / stride + 1;
  if (oh <= 0 || ow <= 0) throw ShapeError("conv2d: empty output");

  // Zero-pad once so kernels need no boundary logic.
  const int64_t ph = h + 2 * padding, pw = w + 2 * padding;
  Tensor padded({cin, ph, pw});
  for (int64_t c = 0; c < cin; ++c)
    for (int64_t y = 0; y < h; ++y)
      std::memcpy(padded.data() + (c * ph + y + padding) * pw + padding,
                  input.data() + (c * h + y) * w,
                  static_cast<size_t>(w) * sizeof(double));

  Tensor out({cout, oh, ow});
  kernels::ops().conv2d_padded(
      padded.data(), static_cast<size_t>(cin), static_cast<size_t>(ph),
      static_cast<size_t>(pw), kernels_t.data(), static_cast<size_t>(cout),
      static_cast<size_t>(k), static_cast<size_t>(stride), out.data(),
      static_cast<size_t>(oh), static_cast<size_t>(ow));
  require_finite(out, "conv2d");
  return out;
}

double sum(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v;
  return acc;
}

double mean(const Tensor& t) {
  if (t.numel() == 0) throw ShapeError("mean: empty tensor");
  return sum(t) / static_cast<double>(t.numel());
}

double max_value(const Tensor& t) {
  if (t.numel() == 0) throw ShapeError("max_value: empty tensor");
  double m = t[0];
  for (double v : t.values()) m = std::max(m, v);
  return m;
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw ShapeError("logsumexp: empty axis");
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

Tensor logsumexp(const Tensor& t, int64_t axis) {
  if (t.rank() == 1) {
    if (axis != 0) throw ShapeError("logsumexp: bad axis for rank-1 tensor");
    if (t.numel() == 0) throw ShapeError("logsumexp: empty axis");
    Tensor out(std::vector<int64_t>{});
    out[0] = logsumexp(t.values());
    require_finite(out, "logsumexp");
    return out;
  }
  if (t.rank() != 2) throw ShapeError("logsumexp: rank 1 or 2 supported");
  const int64_t n = t.dim(0), m = t.dim(1);
  if (axis == 1) {
    if (m == 0) throw ShapeError("logsumexp: empty axis");
    Tensor out({n});
    for (int64_t i = 0; i < n; ++i)
      out[i] = logsumexp(t.values().subspan(static_cast<size_t>(i * m),
                                            static_cast<size_t>(m)));
    require_finite(out, "logsumexp");
    return out;
  }
  if (axis == 0) {
    if (n == 0) throw ShapeError("logsumexp: empty axis");
    Tensor out({m});
    std::vector<double> col(static_cast<size_t>(n));
    for (int64_t j = 0; j < m; ++j) {
      for (int64_t i = 0; i < n; ++i) col[static_cast<size_t>(i)] = t.at(i, j);
      out[j] = logsumexp(std::span<const double>(col));
    }
    require_finite(out, "logsumexp");
    return out;
  }
  throw ShapeError("logsumexp: axis must be 0 or 1");
}

}  // namespace stylematch
