// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/scene.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "treeskel/error.hpp"
#include "treeskel/io.hpp"

namespace treeskel::scene {

CameraPose look_at(const Vec3& eye, const Vec3& target, int image_id) {
  const Vec3 f = (target - eye).normalized();
  const Vec3 up = std::abs(f.z()) < 0.99 ? Vec3::UnitZ() : Vec3::UnitY();
  const Vec3 r = f.cross(up).normalized();
  const Vec3 d = f.cross(r);
  CameraPose pose;
  pose.image_id = image_id;
  pose.name = "img_" + std::to_string(image_id) + ".jpg";
  pose.rotation.col(0) = r;
  pose.rotation.col(1) = d;
  pose.rotation.col(2) = f;
  pose.origin = eye;
  return pose;
}

std::optional<Vec2> project(const Intrinsics& k, const CameraPose& pose, const Vec3& x) {
  const Vec3 c = pose.rotation.transpose() * (x - pose.origin);
  if (!(c.z() > 0.0)) return std::nullopt;
  return Vec2(k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy);
}

Scene make_scene(const SceneParams& params) {
  if (!(params.meters_per_unit > 0.0) || !(params.marker_side > 0.0) || params.cameras < 2) {
    throw InputError("scene needs a positive scale, marker side and at least 2 cameras");
  }
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Metric frame, ground at z = 0.
  LabeledPointCloud metric;
  const double ground_area = std::numbers::pi * params.ground_radius * params.ground_radius;
  const auto n_ground = static_cast<std::size_t>(ground_area * params.ground_density);
  for (std::size_t i = 0; i < n_ground; ++i) {
    const double r = params.ground_radius * std::sqrt(unit(rng));
    const double t = 2.0 * std::numbers::pi * unit(rng);
    const Vec3 p(r * std::cos(t), r * std::sin(t), 0.005 * gauss(rng));
    const Vec3 soil(0.35 + 0.05 * unit(rng), 0.42 + 0.05 * unit(rng), 0.22 + 0.04 * unit(rng));
    metric.push_back(p, soil, SemanticLabel::kGround);
  }

  evaluate::SyntheticTreeParams tp = params.tree;
  tp.seed = params.seed;
  const evaluate::SyntheticTree tree = evaluate::generate_synthetic_tree(tp);
  for (std::size_t i = 0; i < tree.cloud.size(); ++i) {
    metric.push_back(tree.cloud.positions[i], tree.cloud.colors[i], tree.cloud.labels[i]);
  }

  // Marker: a flat square on the ground beside the trunk.
  const Vec3 marker_center(1.0, 0.4, 0.002);
  const double yaw = 20.0 * std::numbers::pi / 180.0;
  const Vec3 ex(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 ey(-std::sin(yaw), std::cos(yaw), 0.0);
  const double h = 0.5 * params.marker_side;
  const std::array<Vec3, 4> corners = {
      marker_center - h * ex - h * ey, marker_center + h * ex - h * ey,
      marker_center + h * ex + h * ey, marker_center - h * ex + h * ey};
  for (int i = 0; i < 400; ++i) {
    const double u = unit(rng) - 0.5;
    const double v = unit(rng) - 0.5;
    const bool white = (static_cast<int>((u + 0.5) * 6) + static_cast<int>((v + 0.5) * 6)) % 2 == 0;
    const Vec3 c = white ? Vec3(0.95, 0.95, 0.95) : Vec3(0.05, 0.05, 0.05);
    metric.push_back(marker_center + params.marker_side * (u * ex + v * ey), c,
                     SemanticLabel::kMarker);
  }

  const Vec3 sky_blue(0.55, 0.70, 0.92);
  for (std::size_t i = 0; i < params.sky_points; ++i) {
    // Fringe points hug the branches, as a mis-segmented silhouette would.
    std::size_t j = 0;
    do {
      j = static_cast<std::size_t>(unit(rng) * static_cast<double>(tree.cloud.size()));
    } while (tree.cloud.labels[j] != SemanticLabel::kBranch);
    const Vec3 p = tree.cloud.positions[j] + 0.02 * Vec3(gauss(rng), gauss(rng), gauss(rng));
    const Vec3 c =
        (sky_blue + 0.01 * Vec3(gauss(rng), gauss(rng), gauss(rng))).cwiseMax(0.0).cwiseMin(1.0);
    metric.push_back(p, c, SemanticLabel::kBranch);
  }

  for (std::size_t i = 0; i < params.outliers; ++i) {
    const Vec3 p(5.0 * unit(rng) - 2.5, 5.0 * unit(rng) - 2.5, 0.3 + 2.7 * unit(rng));
    metric.push_back(p, Vec3(0.5, 0.5, 0.5), SemanticLabel::kUnlabeled);
  }

  Scene scene;
  scene.meters_per_unit = params.meters_per_unit;
  scene.marker_side = params.marker_side;
  CameraModel cams;
  cams.intrinsics = {900.0, 900.0, 640.0, 480.0};
  cams.width = 1280;
  cams.height = 960;
  for (int c = 0; c < params.cameras; ++c) {
    const double a = 2.0 * std::numbers::pi * c / params.cameras;
    const Vec3 eye(params.camera_ring_radius * std::cos(a), params.camera_ring_radius * std::sin(a),
                   1.4);
    cams.poses.push_back(look_at(eye, Vec3(0.0, 0.0, 0.9), c + 1));
  }
  for (const auto& pose : cams.poses) {
    MarkerObservation obs;
    obs.image_id = pose.image_id;
    bool visible = true;
    for (int k = 0; k < 4; ++k) {
      const auto px = project(cams.intrinsics, pose, corners[k]);
      if (!px || px->x() < 0.0 || px->y() < 0.0 || px->x() > cams.width || px->y() > cams.height) {
        visible = false;
        break;
      }
      obs.corners[k] = *px + params.pixel_noise * Vec2(gauss(rng), gauss(rng));
    }
    if (visible) scene.markers.push_back(obs);
  }

  for (int i = 0; i < 150; ++i) {
    scene.sky_samples.push_back(
        (sky_blue + 0.01 * Vec3(gauss(rng), gauss(rng), gauss(rng))).cwiseMax(0.0).cwiseMin(1.0));
  }
  for (int i = 0; i < 80; ++i) {
    const Vec3 cloud_white(0.93, 0.94, 0.96);
    scene.sky_samples.push_back((cloud_white + 0.01 * Vec3(gauss(rng), gauss(rng), gauss(rng)))
                                    .cwiseMax(0.0)
                                    .cwiseMin(1.0));
  }

  // Into an arbitrary reconstruction frame.
  Eigen::Quaterniond q(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  q.normalize();
  const Mat3 rot = q.toRotationMatrix();
  const Vec3 shift(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
  const double inv = 1.0 / params.meters_per_unit;
  scene.cloud = metric;
  for (auto& p : scene.cloud.positions) p = inv * (rot * p) + shift;
  scene.cameras = cams;
  for (auto& pose : scene.cameras.poses) {
    pose.rotation = rot * pose.rotation;
    pose.origin = inv * (rot * pose.origin) + shift;
  }
  return scene;
}

void write_scene(const Scene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "sparse");
  io::write_ply(scene.cloud, dir / "cloud.ply");
  io::write_colmap_model(scene.cameras, dir / "sparse");
  io::write_marker_detections(scene.markers, dir / "markers.txt");
  io::write_sky_samples(scene.sky_samples, dir / "sky.txt");
  std::ofstream ini(dir / "treeskel.ini");
  if (!ini) throw InputError("cannot write '" + (dir / "treeskel.ini").string() + "'");
  ini << "# synthetic scene; " << scene.meters_per_unit << " m per reconstruction unit\n"
      << "[input]\n"
      << "cloud = cloud.ply\n"
      << "colmap = sparse\n"
      << "markers = markers.txt\n"
      << "sky_samples = sky.txt\n\n"
      << "[scale]\n"
      << "d_aruco = " << scene.marker_side << "\n\n"
      << "[output]\n"
      << "dir = out\n";
}

}  // namespace treeskel::scene
