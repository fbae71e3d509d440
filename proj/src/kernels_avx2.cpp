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

// AVX2 kernel variants.  Lanes always carry independent output elements and
// every accumulation runs in the scalar reference order, so results are
// bit-identical to kernels_scalar.cpp.  mul+add is used instead of fma for
// the same reason.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "stylematch/kernels.hpp"

namespace stylematch::kernels {
namespace {

inline __m256d maskgt0(__m256d x) {
  return _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GT_OQ);
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void scale_avx2(double alpha, const double* x, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = alpha * x[i];
}

void relu_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, _mm256_and_pd(maskgt0(v), v));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_avx2(const double* pre, const double* g, double* out,
                        std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_loadu_pd(pre + i);
    __m256d gv = _mm256_loadu_pd(g + i);
    _mm256_storeu_pd(out + i, _mm256_and_pd(maskgt0(p), gv));
  }
  for (; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

// Lanes = four adjacent output columns; k-loop order matches scalar.
void matmul_avx2(const double* a, const double* b, double* c, std::size_t n,
                 std::size_t k, std::size_t m, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * m;
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
      __m256d acc =
          accumulate ? _mm256_loadu_pd(crow + j) : _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        __m256d bv = _mm256_loadu_pd(b + p * m + j);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(arow[p]), bv));
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < m; ++j) {
      double acc = accumulate ? crow[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * b[p * m + j];
      crow[j] = acc;
    }
  }
}

// Lanes = four q rows; per-pair d-loop order matches scalar.
void pairwise_sqdist_avx2(const double* p, std::size_t n, const double* q,
                          std::size_t m, std::size_t d, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = p + i * d;
    double* orow = out + i * m;
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
      const double* q0 = q + (j + 0) * d;
      const double* q1 = q + (j + 1) * d;
      const double* q2 = q + (j + 2) * d;
      const double* q3 = q + (j + 3) * d;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t t = 0; t < d; ++t) {
        __m256d qv = _mm256_set_pd(q3[t], q2[t], q1[t], q0[t]);
        __m256d diff = _mm256_sub_pd(_mm256_set1_pd(pi[t]), qv);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
      }
      _mm256_storeu_pd(orow + j, acc);
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

// Lanes = four adjacent output x positions; (cin, ky, kx) order matches
// scalar.  stride 1 loads contiguously, other strides gather.
void conv2d_padded_avx2(const double* in, std::size_t cin, std::size_t ph,
                        std::size_t pw, const double* w, std::size_t cout,
                        std::size_t k, std::size_t stride, double* out,
                        std::size_t oh, std::size_t ow) {
  for (std::size_t co = 0; co < cout; ++co) {
    const double* wco = w + co * cin * k * k;
    double* oplane = out + co * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      std::size_t ox = 0;
      for (; ox + 4 <= ow; ox += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t ci = 0; ci < cin; ++ci) {
          const double* iplane = in + ci * ph * pw;
          const double* wci = wco + ci * k * k;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const double* irow =
                iplane + (oy * stride + ky) * pw + ox * stride;
            const double* wrow = wci + ky * k;
            for (std::size_t kx = 0; kx < k; ++kx) {
              __m256d iv;
              if (stride == 1) {
                iv = _mm256_loadu_pd(irow + kx);
              } else {
                iv = _mm256_set_pd(irow[kx + 3 * stride], irow[kx + 2 * stride],
                                   irow[kx + stride], irow[kx]);
              }
              acc = _mm256_add_pd(acc,
                                  _mm256_mul_pd(iv, _mm256_set1_pd(wrow[kx])));
            }
          }
        }
        _mm256_storeu_pd(oplane + oy * ow + ox, acc);
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

const Ops kAvx2Ops = {
    "avx2",        add_avx2,
    sub_avx2,      mul_avx2,
    axpy_avx2,     scale_avx2,
    relu_avx2,     relu_backward_avx2,
    matmul_avx2,   pairwise_sqdist_avx2,
    conv2d_padded_avx2,
    kScalarOps.conv2d_grad_weights,  // per-weight reduction, stays scalar
};

}  // namespace stylematch::kernels

#endif  // x86_64
