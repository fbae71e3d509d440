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

#include <atomic>

#include "stylematch/errors.hpp"
#include "stylematch/kernels.hpp"

namespace stylematch::kernels {
namespace {

const Ops* table_for(IsaLevel level) {
  switch (level) {
    case IsaLevel::Scalar:
      return &kScalarOps;
#if defined(__x86_64__) || defined(_M_X64)
    case IsaLevel::Avx2:
      return &kAvx2Ops;
#endif
#if defined(__aarch64__)
    case IsaLevel::Neon:
      return &kNeonOps;
#endif
    default:
      return nullptr;
  }
}

bool cpu_supports(IsaLevel level) {
  switch (level) {
    case IsaLevel::Scalar:
      return true;
#if defined(__x86_64__) || defined(_M_X64)
    case IsaLevel::Avx2:
      return __builtin_cpu_supports("avx2");
#endif
#if defined(__aarch64__)
    case IsaLevel::Neon:
      return true;
#endif
    default:
      return false;
  }
}

IsaLevel detect_best() {
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_supports(IsaLevel::Avx2)) return IsaLevel::Avx2;
#elif defined(__aarch64__)
  return IsaLevel::Neon;
#endif
  return IsaLevel::Scalar;
}

std::atomic<const Ops*> g_active{nullptr};
std::atomic<IsaLevel> g_level{IsaLevel::Scalar};

const Ops* init_active() {
  IsaLevel best = detect_best();
  g_level.store(best, std::memory_order_relaxed);
  const Ops* t = table_for(best);
  g_active.store(t, std::memory_order_release);
  return t;
}

}  // namespace

const Ops& ops() {
  const Ops* t = g_active.load(std::memory_order_acquire);
  if (!t) t = init_active();
  return *t;
}

const Ops& scalar_ops() { return kScalarOps; }

IsaLevel active_level() {
  ops();
  return g_level.load(std::memory_order_relaxed);
}

bool level_supported(IsaLevel level) {
  return table_for(level) != nullptr && cpu_supports(level);
}

void force_level(IsaLevel level) {
  if (!level_supported(level))
    throw ConfigError("requested SIMD level not available on this CPU");
  g_level.store(level, std::memory_order_relaxed);
  g_active.store(table_for(level), std::memory_order_release);
}

}  // namespace stylematch::kernels
