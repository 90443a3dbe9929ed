// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treeskel/types.hpp"

namespace treeskel::restore {

/// Plane n.p + d = 0 with unit normal, plus the points within the RANSAC
/// threshold of it.
struct GroundPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  std::vector<std::size_t> inliers;

  double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

struct RestoreParams {
  /// Scene units; <= 0 selects 0.01 x bounding-box diagonal.
  double ransac_threshold = 0.0;
  int ransac_iterations = 1000;
  int sor_k = 20;
  double sor_std_ratio = 2.0;
  double dbscan_eps = 0.03;
  int dbscan_min_pts = 10;
  double sky_color_tolerance = 0.08;
  std::uint64_t seed = 0;

  void validate() const;
};

/// RANSAC over 3-point hypotheses, then a least-squares refit on the
/// inliers. The normal is oriented so most points have positive signed
/// distance; on a tie, its largest-magnitude component is made positive.
GroundPlane fit_ground_plane(const LabeledPointCloud& cloud, const RestoreParams& params);

/// Rigid transform x -> rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

struct Alignment {
  LabeledPointCloud cloud;
  CameraModel cameras;
  RigidTransform transform;
  /// The ground plane in the output frame: normal (0,0,1), offset 0.
  GroundPlane plane;
  bool flipped = false;
};

/// Rotates the plane normal onto +z, moves the plane to z = 0, and turns
/// the scene 180 degrees about the x-axis if the centroid ends up below it.
/// Camera origins and orientations receive the same transform.
Alignment align_to_ground(const LabeledPointCloud& cloud, const CameraModel& cameras,
                          const GroundPlane& plane);

/// Keeps points whose (x, y) lies in the closed bounding box of the camera
/// origins' (x, y).
LabeledPointCloud crop_roi(const LabeledPointCloud& cloud, const CameraModel& cameras);

/// Drops points whose mean distance to their k nearest neighbors exceeds
/// mean + std_ratio * stddev of that statistic over the cloud.
LabeledPointCloud statistical_outlier_removal(const LabeledPointCloud& cloud, int k,
                                              double std_ratio);

/// DBSCAN over 3D vectors. Returns one cluster id per point, -1 for noise.
std::vector<int> dbscan(std::span<const Vec3> points, double eps, int min_pts);

/// Sky-color clusters found in jittered samples.
std::vector<Vec3> sky_color_centroids(std::span<const Vec3> sky_samples,
                                      const RestoreParams& params);

/// Removes points whose color lies within sky_color_tolerance of a sky
/// cluster centroid. Samples are jittered with N(0, 1/256) before DBSCAN.
LabeledPointCloud remove_sky_silhouette(const LabeledPointCloud& cloud,
                                        std::span<const Vec3> sky_samples,
                                        const RestoreParams& params);

}  // namespace treeskel::restore
