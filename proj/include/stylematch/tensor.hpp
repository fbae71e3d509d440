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

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "stylematch/errors.hpp"

namespace stylematch {

/// Dense row-major n-d array of doubles.  The universal value type: images,
/// feature maps, weights, cost matrices all live here.  Public tensor ops
/// reject non-finite results.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape, double fill = 0.0);
  Tensor(std::initializer_list<int64_t> shape, double fill = 0.0)
      : Tensor(std::vector<int64_t>(shape), fill) {}

  static Tensor from_values(std::vector<int64_t> shape,
                            std::vector<double> values);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t dim(int64_t i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  double& at(int64_t i, int64_t j) { return data_[flat(i, j)]; }
  double at(int64_t i, int64_t j) const { return data_[flat(i, j)]; }
  double& at(int64_t i, int64_t j, int64_t k) { return data_[flat(i, j, k)]; }
  double at(int64_t i, int64_t j, int64_t k) const {
    return data_[flat(i, j, k)];
  }
  double& at(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[flat(i, j, k, l)];
  }
  double at(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[flat(i, j, k, l)];
  }

  /// Same data, new shape; extent product must match.
  Tensor reshaped(std::vector<int64_t> shape) const;

  void fill(double v);
  bool all_finite() const;

 private:
  size_t flat(int64_t i, int64_t j) const {
    return static_cast<size_t>(i * shape_[1] + j);
  }
  size_t flat(int64_t i, int64_t j, int64_t k) const {
    return static_cast<size_t>((i * shape_[1] + j) * shape_[2] + k);
  }
  size_t flat(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return static_cast<size_t>(((i * shape_[1] + j) * shape_[2] + k) *
                                   shape_[3] +
                               l);
  }

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

// ---- elementwise ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scaled(const Tensor& a, double alpha);
/// y += alpha * x, shapes must match.
void add_scaled(Tensor& y, double alpha, const Tensor& x);

// ---- linear algebra ----
/// [n x k] * [k x m] -> [n x m]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transposed(const Tensor& a);

// ---- convolution (cross-correlation, odd square kernel) ----
/// input [Cin x H x W], kernels [Cout x Cin x k x k].
/// Output extent (H + 2*padding - k)/stride + 1 must be integral.
Tensor conv2d(const Tensor& input, const Tensor& kernels, int64_t stride,
              int64_t padding);

// ---- reductions ----
double sum(const Tensor& t);
double mean(const Tensor& t);
double max_value(const Tensor& t);

/// log sum exp with max-subtraction.  1-d with axis 0 -> rank-0 tensor
/// (single value); 2-d with axis 0 (down columns) or 1 (across rows).
Tensor logsumexp(const Tensor& t, int64_t axis);
double logsumexp(std::span<const double> v);

/// Throws NumericError if any element is NaN/Inf.
void require_finite(const Tensor& t, const char* what);

}  // namespace stylematch
