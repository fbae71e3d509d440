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

#include <cstddef>

namespace stylematch::kernels {

// Low-level arithmetic kernels behind the tensor ops.  Every kernel has a
// scalar reference implementation and may have SIMD variants; variants are
// vectorized across independent output elements so that each output element
// accumulates in exactly the scalar order.  Together with -ffp-contract=off
// this makes every variant bit-identical to the reference, which the
// equivalence tests assert.
struct Ops {
  const char* name;

  // Elementwise, out may alias a or b.
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = alpha * x
  void (*scale)(double alpha, const double* x, double* out, std::size_t n);
  void (*relu)(const double* x, double* out, std::size_t n);
  // out = g where pre > 0 else 0
  void (*relu_backward)(const double* pre, const double* g, double* out,
                        std::size_t n);

  // c[n x m] = a[n x k] * b[k x m]; accumulates into c when accumulate.
  void (*matmul)(const double* a, const double* b, double* c, std::size_t n,
                 std::size_t k, std::size_t m, bool accumulate);

  // out[i*m + j] = sum_d (p[i*d..] - q[j*d..])^2
  void (*pairwise_sqdist)(const double* p, std::size_t n, const double* q,
                          std::size_t m, std::size_t d, double* out);

  // Cross-correlation over an already zero-padded input.
  //   in:  cin x ph x pw  (padded spatial extent)
  //   w:   cout x cin x k x k
  //   out: cout x oh x ow, oh = (ph - k)/stride + 1, accumulation order
  //        fixed as (cin, ky, kx).  Bias is not applied here.
  void (*conv2d_padded)(const double* in, std::size_t cin, std::size_t ph,
                        std::size_t pw, const double* w, std::size_t cout,
                        std::size_t k, std::size_t stride, double* out,
                        std::size_t oh, std::size_t ow);

  // dW[co][ci][ky][kx] += sum_{oy,ox} dout[co][oy][ox] *
  //                                   in[ci][oy*stride+ky][ox*stride+kx]
  // Per-weight reduction; scalar only (no variant pays off here).
  void (*conv2d_grad_weights)(const double* in, std::size_t cin,
                              std::size_t ph, std::size_t pw,
                              const double* dout, std::size_t cout,
                              std::size_t oh, std::size_t ow, std::size_t k,
                              std::size_t stride, double* dw);
};

enum class IsaLevel { Scalar, Avx2, Neon };

// Dispatched table (best ISA the CPU supports, or whatever force_level set).
const Ops& ops();
// Always the scalar reference, for equivalence testing.
const Ops& scalar_ops();

IsaLevel active_level();
// Force a level for tests; throws ConfigError if unsupported on this CPU.
void force_level(IsaLevel level);
bool level_supported(IsaLevel level);

extern const Ops kScalarOps;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops kAvx2Ops;
#endif
#if defined(__aarch64__)
extern const Ops kNeonOps;
#endif

}  // namespace stylematch::kernels
