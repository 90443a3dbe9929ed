// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "treeskel/contraction.hpp"
#include "treeskel/types.hpp"

namespace treeskel::evaluate {

/// Procedural cylinder-segment tree. Lengths and radii are meters.
struct SyntheticTreeParams {
  double trunk_height = 1.8;
  double trunk_radius = 0.11;
  int branch_levels = 2;
  int branches_per_level = 4;
  double length_decay = 0.5;
  double radius_decay = 0.3;
  /// Surface samples per square meter.
  double point_density = 8000.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Medial-axis polylines of every trunk and branch.
struct GroundTruthSkeleton {
  std::vector<std::vector<Vec3>> polylines;

  /// Points along every polyline at most `spacing` apart, endpoints included.
  std::vector<Vec3> densify(double spacing) const;
};

struct SyntheticTree {
  LabeledPointCloud cloud;
  GroundTruthSkeleton skeleton;
  /// Per-point radius of the cylinder the point was sampled from.
  std::vector<double> sample_radius;
};

/// Trunk: vertical tapered stack with small bends. Each level spawns
/// branches at random azimuths pitched upward. Trunk samples are labeled
/// trunk, everything else branch.
SyntheticTree generate_synthetic_tree(const SyntheticTreeParams& params);

/// Adds N(0, factor * sigma_d) to every coordinate, sigma_d being the mean
/// nearest-neighbor distance of the input.
LabeledPointCloud add_noise(const LabeledPointCloud& cloud, double factor, std::uint64_t seed);

/// Picks `count` random trunk points and removes every point within
/// `radius` of any of them.
LabeledPointCloud punch_holes(const LabeledPointCloud& cloud, std::size_t count, double radius,
                              std::uint64_t seed);

/// One point per occupied voxel: member centroid, mean color, majority
/// label (ties to the lowest code). Output ordered by voxel index.
LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud, double voxel_size);

/// Symmetric mean of squared nearest-neighbor distances.
double chamfer_distance(std::span<const Vec3> x, std::span<const Vec3> y);

struct DatasetParams {
  int trees = 5;
  SyntheticTreeParams tree;
  double noise_factor = 3.0;
  std::size_t hole_count = 4;
  double hole_radius = 0.08;
  double voxel_size = 0.015;
  double skeleton_spacing = 0.01;
  std::uint64_t seed = 7;
};

enum class Algorithm { kLbc, kSlbc };
enum class Corruption { kNoise, kNoiseOcclusion };

std::string_view algorithm_name(Algorithm a);
std::string_view corruption_name(Corruption c);

struct ScoreRow {
  int tree_id;
  Algorithm algorithm;
  Corruption corruption;
  double chamfer;
  std::size_t points;
  int iterations;
};

struct ComparisonReport {
  std::vector<ScoreRow> rows;

  double mean(Algorithm a, Corruption c) const;
  /// Delimited rows: tree_id,algorithm,corruption,chamfer,points,iterations.
  void write_rows(std::ostream& out) const;
  /// Four-row table, LBC/S-LBC x noise/noise+occlusion.
  void write_summary(std::ostream& out) const;
};

/// The synthetic corruption pipeline for one tree, as scored.
LabeledPointCloud corrupt(const SyntheticTree& tree, const DatasetParams& params,
                          Corruption corruption, std::uint64_t seed);

/// Parameters for tree `index` of a dataset: the base parameters with a
/// per-tree seed and mild size variation.
SyntheticTreeParams tree_params(const DatasetParams& params, int index);

ComparisonReport run_comparison(const DatasetParams& dataset,
                                const contraction::ContractionParams& contraction,
                                const std::filesystem::path& artifact_dir = {});

}  // namespace treeskel::evaluate
