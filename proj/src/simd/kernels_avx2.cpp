// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants. Compiled with -mavx2 only; callers reach these through
// avx2_kernels(), which checks CPU support first.

#include <immintrin.h>

#include <limits>

#include "treeskel/simd/kernels.hpp"

namespace treeskel::simd {
namespace {

inline __m256d sq_dist4(const double* xs, const double* ys, const double* zs, std::size_t i,
                        __m256d qx, __m256d qy, __m256d qz) {
  const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
  const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
  const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
  return _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                       _mm256_mul_pd(dz, dz));
}

inline double sq_dist(double x, double y, double z, const double* q) {
  const double dx = x - q[0];
  const double dy = y - q[1];
  const double dz = z - q[2];
  return (dx * dx + dy * dy) + dz * dz;
}

void min_update(const double* xs, const double* ys, const double* zs, std::size_t n,
                const double* q, double* mind) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = sq_dist4(xs, ys, zs, i, qx, qy, qz);
    // min_pd(a, b) returns a < b ? a : b, matching the scalar select.
    _mm256_storeu_pd(mind + i, _mm256_min_pd(d, _mm256_loadu_pd(mind + i)));
  }
  for (; i < n; ++i) {
    const double d = sq_dist(xs[i], ys[i], zs[i], q);
    mind[i] = d < mind[i] ? d : mind[i];
  }
}

void min_update_tracked(const double* xs, const double* ys, const double* zs, std::size_t n,
                        const double* q, double* key, std::int64_t* parent, std::int64_t source) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  const __m256d src = _mm256_castsi256_pd(_mm256_set1_epi64x(source));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = sq_dist4(xs, ys, zs, i, qx, qy, qz);
    const __m256d k = _mm256_loadu_pd(key + i);
    const __m256d lt = _mm256_cmp_pd(d, k, _CMP_LT_OQ);
    _mm256_storeu_pd(key + i, _mm256_blendv_pd(k, d, lt));
    auto* pp = reinterpret_cast<double*>(parent + i);
    const __m256d p = _mm256_loadu_pd(pp);
    _mm256_storeu_pd(pp, _mm256_blendv_pd(p, src, lt));
  }
  for (; i < n; ++i) {
    const double d = sq_dist(xs[i], ys[i], zs[i], q);
    if (d < key[i]) {
      key[i] = d;
      parent[i] = source;
    }
  }
}

double nearest_sq(const double* xs, const double* ys, const double* zs, std::size_t n,
                  const double* q) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  __m256d best4 = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) best4 = _mm256_min_pd(sq_dist4(xs, ys, zs, i, qx, qy, qz), best4);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best4);
  double best = std::numeric_limits<double>::infinity();
  for (double v : lanes) best = v < best ? v : best;
  for (; i < n; ++i) {
    const double d = sq_dist(xs[i], ys[i], zs[i], q);
    best = d < best ? d : best;
  }
  return best;
}

std::size_t argmax(const double* v, std::size_t n) {
  // Max by lanes, then the first index holding it.
  __m256d m4 = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m4 = _mm256_max_pd(_mm256_loadu_pd(v + i), m4);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m4);
  double m = -std::numeric_limits<double>::infinity();
  for (double x : lanes) m = x > m ? x : m;
  for (; i < n; ++i) m = v[i] > m ? v[i] : m;
  const __m256d target = _mm256_set1_pd(m);
  for (i = 0; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + i), target, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) {
    if (v[i] == m) return i;
  }
  return 0;
}

std::size_t argmin_nonneg(const double* v, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  const __m256d zero = _mm256_setzero_pd();
  const __m256d vinf = _mm256_set1_pd(inf);
  __m256d m4 = vinf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d ok = _mm256_cmp_pd(x, zero, _CMP_GE_OQ);
    m4 = _mm256_min_pd(_mm256_blendv_pd(vinf, x, ok), m4);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m4);
  double m = inf;
  for (double x : lanes) m = x < m ? x : m;
  for (; i < n; ++i) {
    if (v[i] >= 0.0 && v[i] < m) m = v[i];
  }
  if (m == inf) {
    // Only +inf (or nothing) is eligible; defer to the scalar rule.
    for (i = 0; i < n; ++i) {
      if (v[i] >= 0.0) return i;
    }
    return n;
  }
  const __m256d target = _mm256_set1_pd(m);
  for (i = 0; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + i), target, _CMP_EQ_OQ));
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) {
    if (v[i] == m) return i;
  }
  return n;
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2",     min_update, min_update_tracked,
                                 nearest_sq, argmax,     argmin_nonneg};
  return table;
}

}  // namespace treeskel::simd
