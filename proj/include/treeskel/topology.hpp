// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "treeskel/io.hpp"
#include "treeskel/types.hpp"

namespace treeskel::topology {

enum class FpsStart {
  kFarthestFromCentroid,  // default; deterministic
  kFirstPoint,
};

/// Greedy farthest point sampling. Returns n indices in selection order;
/// ties go to the lower index.
std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t n,
                                                 FpsStart start = FpsStart::kFarthestFromCentroid);

/// Default sample count for a skeleton of `n_points`: max(100, n/50),
/// capped at n_points.
std::size_t default_fps_count(std::size_t n_points);

/// Euclidean minimum spanning tree over the complete graph (Prim, O(V^2)).
/// Edges are stored as (min, max) index pairs sorted lexicographically.
SkeletonGraph minimum_spanning_tree(std::span<const Vec3> points);

/// Removes every degree-2 node, joining its two neighbors directly. Only
/// tips (degree 1) and junctions (degree >= 3) remain, except that a bare
/// path collapses to its two endpoints. Throws InputError when the input is
/// not a tree.
SkeletonGraph simplify_graph(const SkeletonGraph& graph);

void export_graph(const SkeletonGraph& graph, const std::filesystem::path& path,
                  io::GraphFormat format);

}  // namespace treeskel::topology
