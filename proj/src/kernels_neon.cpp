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

// NEON kernel variants (2-wide f64).  Same contract as the AVX2 file: lanes
// carry independent output elements, accumulation order matches the scalar
// reference, vmul+vadd instead of fused ops.

#if defined(__aarch64__)

#include <arm_neon.h>

#include "stylematch/kernels.hpp"

namespace stylematch::kernels {
namespace {

void add_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(av, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_neon(double alpha, const double* x, double* out, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(av, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void relu_neon(const double* x, double* out, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    uint64x2_t mask = vcgtq_f64(v, zero);
    vst1q_f64(out + i,
              vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(v))));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_neon(const double* pre, const double* g, double* out,
                        std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    uint64x2_t mask = vcgtq_f64(vld1q_f64(pre + i), zero);
    float64x2_t gv = vld1q_f64(g + i);
    vst1q_f64(out + i, vreinterpretq_f64_u64(
                           vandq_u64(mask, vreinterpretq_u64_f64(gv))));
  }
  for (; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

void matmul_neon(const double* a, const double* b, double* c, std::size_t n,
                 std::size_t k, std::size_t m, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * m;
    std::size_t j = 0;
    for (; j + 2 <= m; j += 2) {
      float64x2_t acc = accumulate ? vld1q_f64(crow + j) : vdupq_n_f64(0.0);
      for (std::size_t p = 0; p < k; ++p)
        acc = vaddq_f64(
            acc, vmulq_f64(vdupq_n_f64(arow[p]), vld1q_f64(b + p * m + j)));
      vst1q_f64(crow + j, acc);
    }
    for (; j < m; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * m + j];
      crow[j] = acc;
    }
  }
}

void pairwise_sqdist_neon(const double* p, std::size_t n, const double* q,
                          std::size_t m, std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = p + i * d;
    double* orow = out + i * m;
    std::size_t j = 0;
    for (; j + 2 <= m; j += 2) {
      const double* q0 = q + (j + 0) * d;
      const double* q1 = q + (j + 1) * d;
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t t = 0; t < d; ++t) {
        float64x2_t qv = {q0[t], q1[t]};
        float64x2_t diff = vsubq_f64(vdupq_n_f64(pi[t]), qv);
        acc = vaddq_f64(acc, vmulq_f64(diff, diff));
      }
      vst1q_f64(orow + j, acc);
    }
    for (; j < m; ++j) {
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

void conv2d_padded_neon(const double* in, std::size_t cin, std::size_t ph,
                        std::size_t pw, const double* w, std::size_t cout,
                        std::size_t k, std::size_t stride, double* out,
                        std::size_t oh, std::size_t ow) {
  for (std::size_t co = 0; co < cout; ++co) {
    const double* wco = w + co * cin * k * k;
    double* oplane = out + co * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      std::size_t ox = 0;
      for (; ox + 2 <= ow; ox += 2) {
        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* iplane = in + ci * ph * pw;
          const double* wci = wco + ci * k * k;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const double* irow =
                iplane + (oy * stride + ky) * pw + ox * stride;
            const double* wrow = wci + ky * k;
            for (std::size_t kx = 0; kx < k; ++kx) {
              float64x2_t iv = {irow[kx], irow[kx + stride]};
              acc = vaddq_f64(acc, vmulq_f64(iv, vdupq_n_f64(wrow[kx])));
            }
          }
        }
        vst1q_f64(oplane + oy * ow + ox, acc);
      }
      for (; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* iplane = in + ci * ph * pw;
          const double* wci = wco + ci * k * k;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const double* irow =
                iplane + (oy * stride + ky) * pw + ox * stride;
            const double* wrow = wci + ky * k;
            for (std::size_t kx = 0; kx < k; ++kx) acc += irow[kx] * wrow[kx];
          }
        }
        oplane[oy * ow + ox] = acc;
      }
    }
  }
}

}  // namespace

const Ops kNeonOps = {
    "neon",        add_neon,
    sub_neon,      mul_neon,
    axpy_neon,     scale_neon,
    relu_neon,     relu_backward_neon,
    matmul_neon,   pairwise_sqdist_neon,
    conv2d_padded_neon,
    kScalarOps.conv2d_grad_weights,
};

}  // namespace stylematch::kernels

#endif  // __aarch64__
