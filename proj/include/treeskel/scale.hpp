// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "treeskel/types.hpp"

namespace treeskel::scale {

/// Half-line origin + lambda * direction with a unit direction.
struct Ray {
  Vec3 origin;
  Vec3 direction;
};

struct RayIntersection {
  Vec3 point;
  /// RMS of the orthogonal point-to-line distances.
  double residual;
};

struct ScaleEstimate {
  double scale = 1.0;                 // meters per scene unit
  std::array<Vec3, 4> corners;        // triangulated marker corners, scene units
  double mean_side = 0.0;             // mean neighboring-corner distance, scene units
  std::array<double, 4> residuals{};  // per-corner RMS line distance
  std::size_t views = 0;
};

/// Back-projects pixel `pixel` of image `image_id`:
/// direction = R * normalize(K^-1 (u, v, 1)), origin = camera center.
Ray pixel_to_ray(const CameraModel& camera, int image_id, const Vec2& pixel);

/// Point minimizing the summed squared distance to all rays, from the
/// normal equations sum(I - u u^T) x = sum(I - u u^T) t. Throws
/// NumericalError when the smallest eigenvalue of the system matrix is
/// below 1e-10 times the largest (e.g. all rays parallel).
RayIntersection intersect_rays_least_squares(std::span<const Ray> rays);

/// Summed squared point-to-line distance of `x` to the rays.
double sum_squared_ray_distance(const Vec3& x, std::span<const Ray> rays);

/// Triangulates the four marker corners from every observation and returns
/// s = marker_side / mean side length. Needs at least two observations.
ScaleEstimate estimate_scale(std::span<const MarkerObservation> observations,
                             const CameraModel& camera, double marker_side_m);

/// Multiplies point positions and camera origins by s.
void apply_scale(LabeledPointCloud& cloud, CameraModel& camera, double s);

}  // namespace treeskel::scale
