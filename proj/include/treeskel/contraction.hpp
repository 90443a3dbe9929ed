// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "treeskel/types.hpp"

namespace treeskel::contraction {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, std::ptrdiff_t>;

/// Local triangulated one-rings over a point cloud.
///
/// `fans[i]` holds the triangles (i, a, b) of point i's local Delaunay
/// triangulation that touch i. `neighbors[i]` is the symmetrized union of
/// all fan vertices (sorted, no self-loops). Points whose neighborhood is
/// collinear get a two-sided chain adjacency and no fan; they are flagged
/// in `isolated`. "Collinear" means the middle PCA eigenvalue is at most
/// `line_ratio` times the largest.
struct NeighborhoodGraph {
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<std::vector<std::array<std::size_t, 2>>> fans;  // (a, b) per triangle (i, a, b)
  std::vector<bool> isolated;

  std::size_t size() const { return neighbors.size(); }
};

enum class CoincidentPolicy {
  kThrow,    // zero-spread neighborhood is an error
  kIsolate,  // flag the point isolated and continue
};

/// k nearest neighbors, projected on their PCA tangent plane and
/// triangulated; requires N > k >= 3.
NeighborhoodGraph build_neighborhoods(std::span<const Vec3> points, std::size_t k,
                                      CoincidentPolicy policy = CoincidentPolicy::kThrow,
                                      double line_ratio = 1e-10);

/// Mean distance from each point to its neighbors; 0 for points without
/// neighbors. Drives the attraction re-weighting.
std::vector<double> one_ring_extent(std::span<const Vec3> points, const NeighborhoodGraph& nbhd);

/// Symmetric cotangent Laplacian: L_ij = 1/2 (cot a_ij + cot b_ij) over the
/// triangles sharing edge ij, L_ii = -sum_j L_ij.
struct SparseLaplacian {
  SparseMatrix matrix;
  /// Points with no incident triangle in any fan; their rows are zero.
  std::vector<std::size_t> isolated;
  /// Area of each point's own fan.
  std::vector<double> one_ring_area;
};

/// Cotangents are clamped to [-cot 1deg, cot 1deg]. Where both endpoints'
/// fans contain an edge the two estimates are averaged; otherwise the one
/// available estimate is used.
SparseLaplacian build_cotangent_laplacian(std::span<const Vec3> points,
                                          const NeighborhoodGraph& nbhd);

/// Hadamard weights for the contraction block: row i carries lambda_T when
/// point i is trunk and none of its Laplacian neighbors is branch, and 1
/// otherwise. The pattern matches the Laplacian's (diagonal included).
struct SemanticWeights {
  SparseMatrix matrix;
  std::vector<double> row_weight;
};

SemanticWeights build_semantic_weights(std::span<const SemanticLabel> labels,
                                       const SparseLaplacian& laplacian, double lambda_trunk);

struct ContractionParams {
  /// Negative selects 1 / (10 sqrt(mean one-ring area)) of the input.
  double initial_contraction_weight = -1.0;
  double initial_attraction_weight = 1.0;
  double contraction_amplification = 3.0;
  double max_contraction_weight = 2048.0;
  /// Upper bound on initial / current one-ring extent in the W_H update.
  double max_attraction_gain = 1e4;
  int max_iterations = 20;
  /// Stop once bounding volume / initial bounding volume drops below this.
  double volume_ratio_threshold = 0.01;
  std::size_t k = 16;
  /// Neighborhoods flatter than this (middle / largest PCA variance) are
  /// treated as already contracted to a curve.
  double degenerate_ratio = 1e-2;
  double lambda_trunk = 10.0;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double contraction_weight = 0.0;
  double mean_attraction_weight = 0.0;
  double volume_ratio = 1.0;
  std::size_t isolated = 0;
  std::size_t semantic_rows = 0;  // rows carrying lambda_T
};

struct ContractionResult {
  LabeledPointCloud cloud;
  std::vector<IterationRecord> log;
  bool converged = false;  // volume criterion met before max_iterations
};

/// Laplacian-based contraction: repeatedly solves
///   [W_L L; W_H] C' = [0; W_H C]
/// in the least-squares sense, amplifying W_L and re-weighting W_H by the
/// shrinkage of each one-ring, and rebuilding L from the new positions.
ContractionResult contract_lbc(const LabeledPointCloud& cloud, const ContractionParams& params);

/// Semantic variant: the contraction block becomes S o (W_L L) with S
/// rebuilt from the labels alongside L every iteration.
ContractionResult contract_slbc(const LabeledPointCloud& cloud, const ContractionParams& params);

/// One least-squares step with explicit weights; exposed for tests.
/// `semantic` may be null (all ones).
std::vector<Vec3> contraction_step(std::span<const Vec3> points, const SparseMatrix& laplacian,
                                   const SparseMatrix* semantic,
                                   std::span<const double> contraction_weight,
                                   std::span<const double> attraction_weight);

}  // namespace treeskel::contraction
