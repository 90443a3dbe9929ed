// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/restore.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>

#include "treeskel/error.hpp"
#include "treeskel/geometry.hpp"
#include "treeskel/spatial.hpp"

namespace treeskel::restore {

void RestoreParams::validate() const {
  if (ransac_iterations < 1 || sor_k < 1 || dbscan_min_pts < 1) {
    throw InputError("restore counts must be >= 1");
  }
  if (!(sor_std_ratio > 0.0) || !(dbscan_eps > 0.0) || !(sky_color_tolerance >= 0.0) ||
      ransac_threshold < 0.0) {
    throw InputError("restore thresholds must be positive");
  }
}

namespace {

double bbox_diagonal(std::span<const Vec3> pts) {
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<std::size_t> plane_inliers(std::span<const Vec3> pts, const Vec3& n, double d,
                                       double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(n.dot(pts[i]) + d) <= threshold) out.push_back(i);
  }
  return out;
}

}  // namespace

GroundPlane fit_ground_plane(const LabeledPointCloud& cloud, const RestoreParams& params) {
  params.validate();
  const auto& pts = cloud.positions;
  const std::size_t n = pts.size();
  if (n < 3) throw InputError("fit_ground_plane needs at least 3 points");
  const double diag = bbox_diagonal(pts);
  const double threshold = params.ransac_threshold > 0.0 ? params.ransac_threshold : 0.01 * diag;

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t best_count = 0;
  Vec3 best_n = Vec3::Zero();
  double best_d = 0.0;
  for (int it = 0; it < params.ransac_iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || a == c || b == c) continue;
    const Vec3 nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double len = nrm.norm();
    if (!(len > 1e-12 * diag * diag)) continue;  // collinear sample
    const Vec3 unit = nrm / len;
    const double d = -unit.dot(pts[a]);
    std::size_t count = 0;
    for (const auto& p : pts) count += std::abs(unit.dot(p) + d) <= threshold ? 1 : 0;
    if (count > best_count) {
      best_count = count;
      best_n = unit;
      best_d = d;
    }
  }
  if (best_count == 0) throw NumericalError("fit_ground_plane: every RANSAC sample was degenerate");

  // Least-squares refit on the consensus set.
  const auto consensus = plane_inliers(pts, best_n, best_d, threshold);
  std::vector<Vec3> inlier_pts;
  inlier_pts.reserve(consensus.size());
  for (std::size_t i : consensus) inlier_pts.push_back(pts[i]);
  const geometry::Pca pca = geometry::principal_axes(inlier_pts);
  Vec3 normal = pca.axes.col(0).normalized();
  double offset = -normal.dot(pca.centroid);

  std::size_t above = 0, below = 0;
  for (const auto& p : pts) {
    const double s = normal.dot(p) + offset;
    if (s > threshold)
      ++above;
    else if (s < -threshold)
      ++below;
  }
  bool flip = below > above;
  if (above == below) {
    int axis = 0;
    normal.cwiseAbs().maxCoeff(&axis);
    flip = normal[axis] < 0.0;
  }
  if (flip) {
    normal = -normal;
    offset = -offset;
  }
  GroundPlane plane;
  plane.normal = normal;
  plane.offset = offset;
  plane.inliers = plane_inliers(pts, normal, offset, threshold);
  return plane;
}

Alignment align_to_ground(const LabeledPointCloud& cloud, const CameraModel& cameras,
                          const GroundPlane& plane) {
  const double len = plane.normal.norm();
  if (std::abs(len - 1.0) > 1e-9) throw InputError("ground plane normal is not unit length");
  RigidTransform tf;
  tf.rotation = geometry::rotation_between(plane.normal, Vec3::UnitZ());
  // Points on the plane satisfy n.p = -d, so after rotation they sit at z = -d.
  tf.translation = Vec3(0.0, 0.0, plane.offset);

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cloud.positions) centroid += tf.apply(p);
  if (!cloud.empty()) centroid /= static_cast<double>(cloud.size());

  Alignment out;
  if (centroid.z() < 0.0) {
    const Mat3 flip = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
    tf.rotation = flip * tf.rotation;
    tf.translation = flip * tf.translation;
    out.flipped = true;
  }
  out.transform = tf;
  out.cloud = cloud;
  for (auto& p : out.cloud.positions) p = tf.apply(p);
  out.cameras = cameras;
  for (auto& pose : out.cameras.poses) {
    pose.origin = tf.apply(pose.origin);
    pose.rotation = tf.rotation * pose.rotation;
  }
  out.plane.normal = Vec3::UnitZ();
  out.plane.offset = 0.0;
  out.plane.inliers = plane.inliers;
  return out;
}

LabeledPointCloud crop_roi(const LabeledPointCloud& cloud, const CameraModel& cameras) {
  if (cameras.poses.empty()) throw InputError("crop_roi needs at least one camera");
  Vec2 lo = cameras.poses.front().origin.head<2>();
  Vec2 hi = lo;
  for (const auto& pose : cameras.poses) {
    lo = lo.cwiseMin(pose.origin.head<2>());
    hi = hi.cwiseMax(pose.origin.head<2>());
  }
  std::vector<bool> keep(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    keep[i] = p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
  return cloud.filter(keep);
}

LabeledPointCloud statistical_outlier_removal(const LabeledPointCloud& cloud, int k,
                                              double std_ratio) {
  if (k < 1) throw InputError("sor_k must be >= 1");
  if (cloud.size() <= static_cast<std::size_t>(k)) {
    throw InputError("statistical_outlier_removal needs more than sor_k points");
  }
  const auto mean_d = mean_knn_distances(cloud.positions, static_cast<std::size_t>(k));
  const double n = static_cast<double>(mean_d.size());
  const double mu = std::accumulate(mean_d.begin(), mean_d.end(), 0.0) / n;
  double var = 0.0;
  for (double d : mean_d) var += (d - mu) * (d - mu);
  const double sigma = std::sqrt(var / n);
  const double limit = mu + std_ratio * sigma;
  std::vector<bool> keep(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) keep[i] = mean_d[i] <= limit;
  return cloud.filter(keep);
}

std::vector<int> dbscan(std::span<const Vec3> points, double eps, int min_pts) {
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(points.size(), kUnvisited);
  if (points.empty()) return label;
  const KdTree tree(points);
  int cluster = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    const auto seeds = tree.radius(points[i], eps);
    if (static_cast<int>(seeds.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<std::size_t> queue;
    for (const auto& s : seeds) queue.push_back(s.index);
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      const auto nb = tree.radius(points[j], eps);
      if (static_cast<int>(nb.size()) >= min_pts) {
        for (const auto& s : nb) {
          if (label[s.index] == kUnvisited || label[s.index] == kNoise) queue.push_back(s.index);
        }
      }
    }
    ++cluster;
  }
  return label;
}

std::vector<Vec3> sky_color_centroids(std::span<const Vec3> sky_samples,
                                      const RestoreParams& params) {
  params.validate();
  if (sky_samples.empty()) throw InputError("remove_sky_silhouette needs at least one sky sample");
  // Quantized 8-bit colors do not cluster; jitter by one quantization step.
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> jitter(0.0, 1.0 / 256.0);
  std::vector<Vec3> jittered(sky_samples.begin(), sky_samples.end());
  for (auto& c : jittered) {
    const double r = jitter(rng);
    const double g = jitter(rng);
    const double b = jitter(rng);
    c += Vec3(r, g, b);
  }
  const auto labels = dbscan(jittered, params.dbscan_eps, params.dbscan_min_pts);
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Vec3> sums(static_cast<std::size_t>(std::max(clusters, 0)), Vec3::Zero());
  std::vector<std::size_t> counts(sums.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    sums[labels[i]] += jittered[i];
    ++counts[labels[i]];
  }
  std::vector<Vec3> centroids;
  for (std::size_t c = 0; c < sums.size(); ++c)
    centroids.push_back(sums[c] / static_cast<double>(counts[c]));
  return centroids;
}

LabeledPointCloud remove_sky_silhouette(const LabeledPointCloud& cloud,
                                        std::span<const Vec3> sky_samples,
                                        const RestoreParams& params) {
  const auto centroids = sky_color_centroids(sky_samples, params);
  if (centroids.empty()) return cloud;
  const double tol2 = params.sky_color_tolerance * params.sky_color_tolerance;
  std::vector<bool> keep(cloud.size(), true);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (const auto& c : centroids) {
      if ((cloud.colors[i] - c).squaredNorm() <= tol2) {
        keep[i] = false;
        break;
      }
    }
  }
  return cloud.filter(keep);
}

}  // namespace treeskel::restore
