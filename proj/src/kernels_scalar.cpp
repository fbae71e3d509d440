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

#include "stylematch/kernels.hpp"

namespace stylematch::kernels {
namespace {

void add_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_scalar(double alpha, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * x[i];
}

void relu_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* pre, const double* g, double* out,
                          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

// Inner k-loop per output element; SIMD variants keep this exact order.
void matmul_scalar(const double* a, const double* b, double* c, std::size_t n,
                   std::size_t k, std::size_t m, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * m + j];
      crow[j] = acc;
    }
  }
}

void pairwise_sqdist_scalar(const double* p, std::size_t n, const double* q,
                            std::size_t m, std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = p + i * d;
    double* orow = out + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* qj = q + j * d;
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        double diff = pi[t] - qj[t];
        acc += diff * diff;
      }
      orow[j] = acc;
    }
  }
}

void conv2d_padded_scalar(const double* in, std::size_t cin, std::size_t ph,
                          std::size_t pw, const double* w, std::size_t cout,
                          std::size_t k, std::size_t stride, double* out,
                          std::size_t oh, std::size_t ow) {
  for (std::size_t co = 0; co < cout; ++co) {
    const double* wco = w + co * cin * k * k;
    double* oplane = out + co * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* iplane = in + ci * ph * pw;
          const double* wci = wco + ci * k * k;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const double* irow = iplane + (oy * stride + ky) * pw + ox * stride;
            const double* wrow = wci + ky * k;
            for (std::size_t kx = 0; kx < k; ++kx) acc += irow[kx] * wrow[kx];
          }
        }
        oplane[oy * ow + ox] = acc;
      }
    }
  }
}

void conv2d_grad_weights_scalar(const double* in, std::size_t cin,
                                std::size_t ph, std::size_t pw,
                                const double* dout, std::size_t cout,
                                std::size_t oh, std::size_t ow, std::size_t k,
                                std::size_t stride, double* dw) {
  (void)ph;
  for (std::size_t co = 0; co < cout; ++co) {
    const double* dplane = dout + co * oh * ow;
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* iplane = in + ci * ph * pw;
      double* wci = dw + (co * cin + ci) * k * k;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          double acc = wci[ky * k + kx];
          for (std::size_t oy = 0; oy < oh; ++oy) {
            const double* irow = iplane + (oy * stride + ky) * pw + kx;
            const double* drow = dplane + oy * ow;
            for (std::size_t ox = 0; ox < ow; ++ox)
              acc += drow[ox] * irow[ox * stride];
          }
          wci[ky * k + kx] = acc;
        }
      }
    }
  }
}

}  // namespace

const Ops kScalarOps = {
    "scalar",         add_scalar,
    sub_scalar,       mul_scalar,
    axpy_scalar,      scale_scalar,
    relu_scalar,      relu_backward_scalar,
    matmul_scalar,    pairwise_sqdist_scalar,
    conv2d_padded_scalar, conv2d_grad_weights_scalar,
};

}  // namespace stylematch::kernels
