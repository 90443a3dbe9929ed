// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "treeskel/types.hpp"

namespace treeskel {

struct Neighbor {
  std::size_t index;
  double sq_dist;
};

/// Static 3D kd-tree over a copy of the input points.
///
/// Query results are ordered by (squared distance, index), so ties resolve
/// the same way a brute-force scan sorted on that key would.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// The k nearest points to `query`. When `exclude` is a valid index that
  /// point is skipped (used for self-queries).
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k,
                            std::size_t exclude = static_cast<std::size_t>(-1)) const;

  /// All points with |p - query| <= radius, ordered by (distance, index).
  std::vector<Neighbor> radius(const Vec3& query, double radius) const;

  Neighbor nearest(const Vec3& query) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int axis = -1;                   // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Per-point mean distance to the k nearest other points.
std::vector<double> mean_knn_distances(std::span<const Vec3> points, std::size_t k);

/// Mean nearest-neighbor distance over the cloud (k = 1 of the above).
double mean_nearest_neighbor_distance(std::span<const Vec3> points);

}  // namespace treeskel
