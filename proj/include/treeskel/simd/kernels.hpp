// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "treeskel/types.hpp"

namespace treeskel::simd {

/// Structure-of-arrays copy of a point set, the layout all kernels read.
struct PointsSoA {
  std::vector<double> x, y, z;

  PointsSoA() = default;
  explicit PointsSoA(std::span<const Vec3> points);
  std::size_t size() const { return x.size(); }
};

/// One implementation of every distance kernel. All variants compute
/// squared distances as (dx*dx + dy*dy) + dz*dz with no fused
/// multiply-add, so results are bit-identical across variants.
struct KernelTable {
  std::string_view name;

  /// mind[i] = min(mind[i], |p_i - q|^2).
  void (*min_update)(const double* xs, const double* ys, const double* zs, std::size_t n,
                     const double* q, double* mind);

  /// Where |p_i - q|^2 < key[i]: key[i] = that distance, parent[i] = source.
  /// Entries with a negative key never change.
  void (*min_update_tracked)(const double* xs, const double* ys, const double* zs, std::size_t n,
                             const double* q, double* key, std::int64_t* parent,
                             std::int64_t source);

  /// min_i |p_i - q|^2, or +inf when n == 0.
  double (*nearest_sq)(const double* xs, const double* ys, const double* zs, std::size_t n,
                       const double* q);

  /// Index of the first maximum of v[0..n); n must be > 0.
  std::size_t (*argmax)(const double* v, std::size_t n);

  /// Index of the first minimum of v[0..n) among entries >= 0, or n if none.
  std::size_t (*argmin_nonneg)(const double* v, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr unless the AVX2 variant was compiled in and the CPU supports it.
const KernelTable* avx2_kernels();

/// Variant picked at first use: AVX2 when available, unless the
/// TREESKEL_SIMD environment variable is set to "scalar".
const KernelTable& active_kernels();

/// Every variant usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

}  // namespace treeskel::simd
