// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace treeskel::simd {

#if defined(TREESKEL_BUILD_AVX2)
const KernelTable& avx2_kernel_table();
#endif

PointsSoA::PointsSoA(std::span<const Vec3> points) {
  x.reserve(points.size());
  y.reserve(points.size());
  z.reserve(points.size());
  for (const auto& p : points) {
    x.push_back(p.x());
    y.push_back(p.y());
    z.push_back(p.z());
  }
}

const KernelTable* avx2_kernels() {
#if defined(TREESKEL_BUILD_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("TREESKEL_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* avx2 = avx2_kernels()) return avx2;
    return &scalar_kernels();
  }();
  return *chosen;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const KernelTable* avx2 = avx2_kernels()) out.push_back(avx2);
  return out;
}

}  // namespace treeskel::simd
