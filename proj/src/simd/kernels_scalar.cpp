// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>

#include "treeskel/simd/kernels.hpp"

namespace treeskel::simd {
namespace {

inline double sq_dist(double x, double y, double z, const double* q) {
  const double dx = x - q[0];
  const double dy = y - q[1];
  const double dz = z - q[2];
  return (dx * dx + dy * dy) + dz * dz;
}

void min_update(const double* xs, const double* ys, const double* zs, std::size_t n,
                const double* q, double* mind) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sq_dist(xs[i], ys[i], zs[i], q);
    mind[i] = d < mind[i] ? d : mind[i];
  }
}

void min_update_tracked(const double* xs, const double* ys, const double* zs, std::size_t n,
                        const double* q, double* key, std::int64_t* parent, std::int64_t source) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sq_dist(xs[i], ys[i], zs[i], q);
    if (d < key[i]) {
      key[i] = d;
      parent[i] = source;
    }
  }
}

double nearest_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                  const double* q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sq_dist(xs[i], ys[i], zs[i], q);
    best = d < best ? d : best;
  }
  return best;
}

std::size_t argmax(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::size_t argmin_nonneg(const double* v, std::size_t n) {
  std::size_t best = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] >= 0.0 && (best == n || v[i] < v[best])) best = i;
  }
  return best;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar",   min_update, min_update_tracked,
                                 nearest_sq, argmax,     argmin_nonneg};
  return table;
}

}  // namespace treeskel::simd
