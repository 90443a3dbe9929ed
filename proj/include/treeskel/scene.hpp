// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "treeskel/evaluate.hpp"
#include "treeskel/types.hpp"

namespace treeskel::scene {

/// Camera-to-world pose at `eye` looking at `target`, image y pointing
/// away from world +z.
CameraPose look_at(const Vec3& eye, const Vec3& target, int image_id);

/// Pinhole projection; empty when the point is behind the camera.
std::optional<Vec2> project(const Intrinsics& k, const CameraPose& pose, const Vec3& x);

struct SceneParams {
  std::uint64_t seed = 1;
  /// Meters per reconstruction unit; the scale stage should recover it.
  double meters_per_unit = 2.5;
  double marker_side = 0.2;  // m
  int cameras = 10;
  double camera_ring_radius = 3.0;  // m
  double pixel_noise = 0.3;
  double ground_radius = 4.0;     // m, wider than the camera ring
  double ground_density = 300.0;  // points per m^2
  std::size_t outliers = 80;
  std::size_t sky_points = 200;
  evaluate::SyntheticTreeParams tree{.trunk_height = 1.8,
                                     .trunk_radius = 0.11,
                                     .branch_levels = 2,
                                     .branches_per_level = 4,
                                     .length_decay = 0.5,
                                     .radius_decay = 0.3,
                                     .point_density = 3000.0,
                                     .seed = 1};
};

/// A labeled reconstruction of one tree on flat ground with a marker,
/// floating outliers and sky-colored fringe points, expressed in an
/// arbitrary similarity frame like an SfM result.
struct Scene {
  LabeledPointCloud cloud;
  CameraModel cameras;
  std::vector<MarkerObservation> markers;
  std::vector<Vec3> sky_samples;
  double meters_per_unit = 1.0;
  double marker_side = 0.0;
};

Scene make_scene(const SceneParams& params);

/// Writes cloud.ply, sparse/{cameras,images}.txt, markers.txt, sky.txt and
/// a treeskel.ini wired to them.
void write_scene(const Scene& scene, const std::filesystem::path& dir);

}  // namespace treeskel::scene
