// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include <Eigen/SparseCholesky>

#include "treeskel/error.hpp"
#include "treeskel/geometry.hpp"
#include "treeskel/spatial.hpp"

namespace treeskel::contraction {
namespace {

const double kMaxCot = 1.0 / std::tan(std::numbers::pi / 180.0);

double clamped_cot(const Vec3& apex, const Vec3& a, const Vec3& b) {
  const Vec3 u = a - apex;
  const Vec3 v = b - apex;
  const double cross = u.cross(v).norm();
  const double dot = u.dot(v);
  if (cross == 0.0) return dot >= 0.0 ? kMaxCot : -kMaxCot;
  return std::clamp(dot / cross, -kMaxCot, kMaxCot);
}

using WeightList = std::vector<std::pair<std::size_t, double>>;

const double* find_weight(const WeightList& list, std::size_t j) {
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const auto& e, std::size_t key) { return e.first < key; });
  return it != list.end() && it->first == j ? &it->second : nullptr;
}

[[maybe_unused]] void check_laplacian(const SparseMatrix& l) {
  for (std::ptrdiff_t c = 0; c < l.outerSize(); ++c) {
    double sum = 0.0;
    double mag = 0.0;
    for (SparseMatrix::InnerIterator it(l, c); it; ++it) {
      sum += it.value();
      mag += std::abs(it.value());
      if (l.coeff(it.col(), it.row()) != it.value()) {
        throw NumericalError("cotangent Laplacian lost symmetry");
      }
    }
    if (std::abs(sum) > 1e-8 * std::max(1.0, mag)) {
      throw NumericalError("cotangent Laplacian row does not sum to zero");
    }
  }
}

}  // namespace

NeighborhoodGraph build_neighborhoods(std::span<const Vec3> points, std::size_t k,
                                      CoincidentPolicy policy, double line_ratio) {
  const std::size_t n = points.size();
  if (k < 3) throw InputError("neighborhood size k must be >= 3");
  if (n <= k) throw InputError("build_neighborhoods needs more than k points");
  const KdTree tree(points);

  NeighborhoodGraph g;
  g.neighbors.assign(n, {});
  g.fans.assign(n, {});
  g.isolated.assign(n, false);

  std::vector<Vec3> local(k + 1);
  std::vector<Vec2> projected(k + 1);
  std::vector<std::size_t> ids(k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nn = tree.knn(points[i], k, i);
    ids[0] = i;
    local[0] = points[i];
    bool coincident = true;
    for (std::size_t m = 0; m < nn.size(); ++m) {
      ids[m + 1] = nn[m].index;
      local[m + 1] = points[nn[m].index];
      coincident = coincident && local[m + 1] == points[i];
    }
    if (coincident) {
      if (policy == CoincidentPolicy::kThrow) {
        throw NumericalError("point " + std::to_string(i) +
                             ": all neighbors coincide, tangent plane undefined");
      }
      g.isolated[i] = true;
      continue;
    }
    const geometry::Pca pca = geometry::principal_axes(local);
    if (!(pca.eigenvalues(1) > line_ratio * pca.eigenvalues(2))) {
      // Collinear neighborhood: link the nearest point on each side.
      const Vec3 axis = pca.axes.col(2);
      std::size_t fwd = n, back = n;
      double fwd_d = 0.0, back_d = 0.0;
      for (std::size_t m = 1; m < ids.size(); ++m) {
        const double t = (local[m] - points[i]).dot(axis);
        const double d = (local[m] - points[i]).squaredNorm();
        if (t > 0.0 && (fwd == n || d < fwd_d)) {
          fwd = ids[m];
          fwd_d = d;
        } else if (t < 0.0 && (back == n || d < back_d)) {
          back = ids[m];
          back_d = d;
        }
      }
      if (fwd != n) g.neighbors[i].push_back(fwd);
      if (back != n) g.neighbors[i].push_back(back);
      g.isolated[i] = true;
      continue;
    }
    const Vec3 e1 = pca.axes.col(2);
    const Vec3 e2 = pca.axes.col(1);
    for (std::size_t m = 0; m < local.size(); ++m) {
      const Vec3 d = local[m] - points[i];
      projected[m] = Vec2(d.dot(e1), d.dot(e2));
    }
    for (const auto& tri : geometry::delaunay_2d(projected)) {
      // Rotate so the center comes first, keeping orientation.
      for (int r = 0; r < 3; ++r) {
        if (tri[r] == 0) {
          const std::size_t a = ids[tri[(r + 1) % 3]];
          const std::size_t b = ids[tri[(r + 2) % 3]];
          g.fans[i].push_back({a, b});
          g.neighbors[i].push_back(a);
          g.neighbors[i].push_back(b);
        }
      }
    }
    if (g.fans[i].empty()) g.isolated[i] = true;
  }

  // Symmetrize by union.
  std::vector<std::vector<std::size_t>> sym(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : g.neighbors[i]) {
      if (j == i) continue;
      sym[i].push_back(j);
      sym[j].push_back(i);
    }
  }
  for (auto& list : sym) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  g.neighbors = std::move(sym);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.neighbors[i].size() < 2) g.isolated[i] = true;
  }
  return g;
}

std::vector<double> one_ring_extent(std::span<const Vec3> points, const NeighborhoodGraph& nbhd) {
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& nb = nbhd.neighbors[i];
    if (nb.empty()) continue;
    double sum = 0.0;
    for (std::size_t j : nb) sum += (points[j] - points[i]).norm();
    out[i] = sum / static_cast<double>(nb.size());
  }
  return out;
}

SparseLaplacian build_cotangent_laplacian(std::span<const Vec3> points,
                                          const NeighborhoodGraph& nbhd) {
  const std::size_t n = points.size();
  if (nbhd.size() != n) throw InputError("neighborhood graph does not match the point count");

  // Per-point estimates from each point's own fan.
  std::vector<WeightList> est(n);
  std::vector<bool> touched(n, false);
  SparseLaplacian out;
  out.one_ring_area.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    WeightList& w = est[i];
    for (const auto& [a, b] : nbhd.fans[i]) {
      const Vec3& pi = points[i];
      const Vec3& pa = points[a];
      const Vec3& pb = points[b];
      // The angle at b faces edge (i, a); the angle at a faces edge (i, b).
      w.emplace_back(a, 0.5 * clamped_cot(pb, pi, pa));
      w.emplace_back(b, 0.5 * clamped_cot(pa, pi, pb));
      out.one_ring_area[i] += 0.5 * (pa - pi).cross(pb - pi).norm();
      touched[i] = touched[a] = touched[b] = true;
    }
    std::sort(w.begin(), w.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    WeightList merged;
    for (const auto& e : w) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second += e.second;
      } else {
        merged.push_back(e);
      }
    }
    w = std::move(merged);
  }

  std::vector<Eigen::Triplet<double, std::ptrdiff_t>> triplets;
  triplets.reserve(n * 8);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j : nbhd.neighbors[i]) {
      const double* wij = find_weight(est[i], j);
      const double* wji = find_weight(est[j], i);
      double v = 0.0;
      if (wij != nullptr && wji != nullptr) {
        v = 0.5 * (*wij + *wji);
      } else if (wij != nullptr) {
        v = *wij;
      } else if (wji != nullptr) {
        v = *wji;
      }
      triplets.emplace_back(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j), v);
      diag += v;
    }
    triplets.emplace_back(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(i), -diag);
    if (!touched[i]) out.isolated.push_back(i);
  }
  out.matrix.resize(static_cast<std::ptrdiff_t>(n), static_cast<std::ptrdiff_t>(n));
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  out.matrix.makeCompressed();
  return out;
}

SemanticWeights build_semantic_weights(std::span<const SemanticLabel> labels,
                                       const SparseLaplacian& laplacian, double lambda_trunk) {
  const auto n = laplacian.matrix.rows();
  if (static_cast<std::ptrdiff_t>(labels.size()) != n) {
    throw InputError("label count does not match the Laplacian dimension");
  }
  SemanticWeights out;
  out.row_weight.assign(labels.size(), 1.0);
  // L is symmetric, so column i lists row i's neighbors.
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (labels[i] != SemanticLabel::kTrunk) continue;
    bool touches_branch = false;
    for (SparseMatrix::InnerIterator it(laplacian.matrix, i); it; ++it) {
      if (it.row() != i && labels[it.row()] == SemanticLabel::kBranch) {
        touches_branch = true;
        break;
      }
    }
    if (!touches_branch) out.row_weight[i] = lambda_trunk;
  }
  out.matrix = laplacian.matrix;
  for (std::ptrdiff_t c = 0; c < out.matrix.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(out.matrix, c); it; ++it) {
      it.valueRef() = out.row_weight[it.row()];
    }
  }
  return out;
}

void ContractionParams::validate() const {
  if (!(initial_attraction_weight > 0.0) || !(max_contraction_weight > 0.0) ||
      !(max_attraction_gain >= 1.0) || !(degenerate_ratio >= 0.0 && degenerate_ratio < 1.0) ||
      !(contraction_amplification > 1.0) || max_iterations < 1 || !(lambda_trunk > 0.0)) {
    throw InputError("contraction parameters must be positive with amplification > 1");
  }
  if (!(volume_ratio_threshold > 0.0 && volume_ratio_threshold < 1.0)) {
    throw InputError("volume ratio threshold must lie in (0, 1)");
  }
  if (k < 3) throw InputError("neighborhood size k must be >= 3");
}

namespace {

bool every_component_anchored(const SparseMatrix& laplacian, const Eigen::VectorXd& wh2) {
  const auto n = laplacian.rows();
  std::vector<std::ptrdiff_t> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::ptrdiff_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::ptrdiff_t c = 0; c < laplacian.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(laplacian, c); it; ++it) {
      if (it.value() != 0.0) parent[find(it.row())] = find(it.col());
    }
  }
  std::vector<char> anchored(static_cast<std::size_t>(n), 0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (wh2[i] > 0.0) anchored[find(i)] = 1;
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!anchored[find(i)]) return false;
  }
  return true;
}

}  // namespace

std::vector<Vec3> contraction_step(std::span<const Vec3> points, const SparseMatrix& laplacian,
                                   const SparseMatrix* semantic,
                                   std::span<const double> contraction_weight,
                                   std::span<const double> attraction_weight) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  if (laplacian.rows() != n || static_cast<std::ptrdiff_t>(contraction_weight.size()) != n ||
      static_cast<std::ptrdiff_t>(attraction_weight.size()) != n) {
    throw InputError("contraction_step: dimension mismatch");
  }
  Eigen::VectorXd wl(n), wh2(n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    wl[i] = contraction_weight[i];
    wh2[i] = attraction_weight[i] * attraction_weight[i];
  }
  SparseMatrix top = wl.asDiagonal() * laplacian;
  if (semantic != nullptr) top = semantic->cwiseProduct(top);
  SparseMatrix normal = SparseMatrix(top.transpose()) * top;
  SparseMatrix anchor(n, n);
  {
    std::vector<Eigen::Triplet<double, std::ptrdiff_t>> diag;
    diag.reserve(static_cast<std::size_t>(n));
    for (std::ptrdiff_t i = 0; i < n; ++i) diag.emplace_back(i, i, wh2[i]);
    anchor.setFromTriplets(diag.begin(), diag.end());
  }
  normal += anchor;

  if (!every_component_anchored(laplacian, wh2)) {
    throw NumericalError(
        "stacked system is rank deficient: a connected component has no attraction");
  }

  Eigen::SimplicialLDLT<SparseMatrix> solver(normal);
  if (solver.info() != Eigen::Success) throw NumericalError("normal-equation factorization failed");
  if (!(solver.vectorD().minCoeff() > 0.0)) {
    throw NumericalError("stacked system is rank deficient");
  }
  Eigen::MatrixXd rhs(n, 3);
  for (std::ptrdiff_t i = 0; i < n; ++i) rhs.row(i) = wh2[i] * points[i].transpose();
  const Eigen::MatrixXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) {
    throw NumericalError("normal-equation solve failed");
  }
  std::vector<Vec3> out(points.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = x.row(i).transpose();
  return out;
}

namespace {

ContractionResult contract(const LabeledPointCloud& cloud, const ContractionParams& params,
                           bool semantic) {
  params.validate();
  cloud.validate();
  if (cloud.size() < 4) throw InputError("contraction needs at least 4 points");
  const std::size_t n = cloud.size();

  std::vector<Vec3> pts = cloud.positions;
  NeighborhoodGraph nbhd =
      build_neighborhoods(pts, params.k, CoincidentPolicy::kThrow, params.degenerate_ratio);
  SparseLaplacian lap = build_cotangent_laplacian(pts, nbhd);
  const std::vector<double> area0 = lap.one_ring_area;
  const std::vector<double> extent0 = one_ring_extent(pts, nbhd);

  double wl = params.initial_contraction_weight;
  if (wl < 0.0) {
    const double mean_area =
        std::accumulate(area0.begin(), area0.end(), 0.0) / static_cast<double>(n);
    if (!(mean_area > 0.0)) {
      throw NumericalError("contraction: input has no triangulated one-rings");
    }
    wl = 1.0 / (10.0 * std::sqrt(mean_area));
  }
  std::vector<double> wh(n, params.initial_attraction_weight);
  const double volume0 = geometry::bounding_volume(pts);
  const double lambda = semantic ? params.lambda_trunk : 1.0;

  ContractionResult result;
  for (int it = 1; it <= params.max_iterations; ++it) {
#ifndef NDEBUG
    check_laplacian(lap.matrix);
#endif
    const SemanticWeights s = build_semantic_weights(cloud.labels, lap, lambda);
    const std::vector<double> wl_vec(n, wl);
    try {
      pts = contraction_step(pts, lap.matrix, &s.matrix, wl_vec, wh);
    } catch (const NumericalError& e) {
      throw NumericalError("contraction iteration " + std::to_string(it) + ": " + e.what());
    }

    nbhd = build_neighborhoods(pts, params.k, CoincidentPolicy::kIsolate, params.degenerate_ratio);
    lap = build_cotangent_laplacian(pts, nbhd);
    const std::vector<double> extent = one_ring_extent(pts, nbhd);

    IterationRecord rec;
    rec.iteration = it;
    rec.contraction_weight = wl;
    rec.semantic_rows = static_cast<std::size_t>(
        std::count_if(s.row_weight.begin(), s.row_weight.end(), [](double w) { return w != 1.0; }));

    wl = std::min(params.contraction_amplification * wl, params.max_contraction_weight);
    double wh_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gain = 1.0;
      if (extent0[i] > 0.0) {
        const double e = extent[i];
        gain = e > 0.0 ? std::min(extent0[i] / e, params.max_attraction_gain)
                       : params.max_attraction_gain;
      }
      wh[i] = params.initial_attraction_weight * gain;
      wh_sum += wh[i];
    }
    rec.mean_attraction_weight = wh_sum / static_cast<double>(n);
    rec.isolated = lap.isolated.size();
    rec.volume_ratio = volume0 > 0.0 ? geometry::bounding_volume(pts) / volume0 : 1.0;
    result.log.push_back(rec);
    if (rec.volume_ratio < params.volume_ratio_threshold) {
      result.converged = true;
      break;
    }
  }
  result.cloud = cloud;
  result.cloud.positions = std::move(pts);
  return result;
}

}  // namespace

ContractionResult contract_lbc(const LabeledPointCloud& cloud, const ContractionParams& params) {
  return contract(cloud, params, false);
}

ContractionResult contract_slbc(const LabeledPointCloud& cloud, const ContractionParams& params) {
  return contract(cloud, params, true);
}

}  // namespace treeskel::contraction
