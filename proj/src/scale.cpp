// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/scale.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "treeskel/error.hpp"

namespace treeskel::scale {

Ray pixel_to_ray(const CameraModel& camera, int image_id, const Vec2& pixel) {
  const CameraPose* pose = camera.find(image_id);
  if (pose == nullptr) throw InputError("no pose for image " + std::to_string(image_id));
  if (!pixel.allFinite()) throw InputError("non-finite pixel coordinate");
  const Intrinsics& k = camera.intrinsics;
  // K^-1 for zero skew.
  const Vec3 cam_dir((pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy, 1.0);
  return {pose->origin, (pose->rotation * cam_dir.normalized()).normalized()};
}

double sum_squared_ray_distance(const Vec3& x, std::span<const Ray> rays) {
  double sum = 0.0;
  for (const auto& r : rays) {
    const Vec3 w = r.origin - x;
    sum += (w - w.dot(r.direction) * r.direction).squaredNorm();
  }
  return sum;
}

RayIntersection intersect_rays_least_squares(std::span<const Ray> rays) {
  if (rays.size() < 2) throw InputError("ray intersection needs at least 2 rays");
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (const auto& r : rays) {
    const Vec3 u = r.direction.normalized();
    const Mat3 proj = Mat3::Identity() - u * u.transpose();
    a += proj;
    b += proj * r.origin;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(a);
  const Vec3 ev = es.eigenvalues();
  if (!(ev(0) >= 1e-10 * ev(2))) {
    throw NumericalError("rays are (nearly) parallel; intersection is not unique");
  }
  const Vec3 x =
      es.eigenvectors() * ((es.eigenvectors().transpose() * b).array() / ev.array()).matrix();
  double sum = 0.0;
  for (const auto& r : rays) {
    const Vec3 u = r.direction.normalized();
    const Vec3 w = r.origin - x;
    sum += (w - w.dot(u) * u).squaredNorm();
  }
  return {x, std::sqrt(sum / static_cast<double>(rays.size()))};
}

ScaleEstimate estimate_scale(std::span<const MarkerObservation> observations,
                             const CameraModel& camera, double marker_side_m) {
  if (observations.size() < 2) {
    throw InputError(
        "minimum requirement for scale estimation not met: the marker must be "
        "detected in N_J >= 2 images, got " +
        std::to_string(observations.size()));
  }
  if (!(marker_side_m > 0.0)) throw InputError("marker side length must be positive");
  ScaleEstimate est;
  est.views = observations.size();
  for (int k = 0; k < 4; ++k) {
    std::vector<Ray> bundle;
    bundle.reserve(observations.size());
    for (const auto& obs : observations) {
      obs.validate();
      bundle.push_back(pixel_to_ray(camera, obs.image_id, obs.corners[k]));
    }
    try {
      const auto hit = intersect_rays_least_squares(bundle);
      est.corners[k] = hit.point;
      est.residuals[k] = hit.residual;
    } catch (const NumericalError& e) {
      throw NumericalError("marker corner " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  double side = 0.0;
  for (int k = 0; k < 4; ++k) side += (est.corners[k] - est.corners[(k + 1) % 4]).norm();
  est.mean_side = side / 4.0;
  if (!(est.mean_side > 0.0)) throw NumericalError("triangulated marker has zero size");
  est.scale = marker_side_m / est.mean_side;
  return est;
}

void apply_scale(LabeledPointCloud& cloud, CameraModel& camera, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InputError("scale factor must be positive");
  for (auto& p : cloud.positions) p *= s;
  for (auto& pose : camera.poses) pose.origin *= s;
}

}  // namespace treeskel::scale
