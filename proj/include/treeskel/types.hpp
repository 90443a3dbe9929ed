// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace treeskel {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Semantic classes produced by the external segmentation network.
/// Values are the on-disk byte codes.
enum class SemanticLabel : std::uint8_t {
  kGround = 0,
  kTrunk = 1,
  kBranch = 2,
  kSign = 3,
  kMarker = 4,
  kCalibration = 5,
  kRoof = 6,
  kUnlabeled = 255,
};

/// Unknown codes map to kUnlabeled.
SemanticLabel label_from_code(int code);
constexpr std::uint8_t label_code(SemanticLabel l) { return static_cast<std::uint8_t>(l); }
std::string_view label_name(SemanticLabel l);

/// Point cloud with per-point RGB in [0,1] and a semantic label.
/// The three arrays always have the same length.
struct LabeledPointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;
  std::vector<SemanticLabel> labels;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  void reserve(std::size_t n);
  void push_back(const Vec3& p, const Vec3& rgb = Vec3::Zero(),
                 SemanticLabel label = SemanticLabel::kUnlabeled);

  /// Copy of the points at `indices`, in that order.
  LabeledPointCloud subset(const std::vector<std::size_t>& indices) const;
  /// Copy of the points whose mask entry is true.
  LabeledPointCloud filter(const std::vector<bool>& keep) const;

  /// Throws InputError if lengths differ, coordinates are non-finite, or
  /// colors fall outside [0,1].
  void validate() const;

  bool operator==(const LabeledPointCloud&) const = default;
};

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Mat3 matrix() const;
  bool operator==(const Intrinsics&) const = default;
};

/// Camera-to-world pose: a camera-frame direction d maps to rotation * d in
/// the world, and the projection center sits at `origin`.
struct CameraPose {
  int image_id = 0;
  std::string name;
  Mat3 rotation = Mat3::Identity();
  Vec3 origin = Vec3::Zero();
};

/// Shared pinhole intrinsics plus one pose per registered image.
struct CameraModel {
  Intrinsics intrinsics;
  int width = 0;
  int height = 0;
  std::vector<CameraPose> poses;

  const CameraPose* find(int image_id) const;
  /// Checks fx, fy > 0 and that every rotation is orthonormal with det +1
  /// within 1e-9.
  void validate() const;
};

/// Four marker corners detected in one image, in cyclic order.
struct MarkerObservation {
  int image_id = 0;
  std::array<Vec2, 4> corners;

  /// Throws InputError for coincident corners or zero-area quads.
  void validate() const;
};

/// Undirected graph over 3D nodes.
struct SkeletonGraph {
  std::vector<Vec3> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
  std::vector<std::size_t> degrees() const;
  std::vector<std::vector<std::size_t>> adjacency() const;
  /// True when connected with |E| = |V| - 1 (the empty graph counts).
  bool is_tree() const;
  double total_length() const;
};

}  // namespace treeskel
