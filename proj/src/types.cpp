// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "treeskel/error.hpp"

namespace treeskel {

SemanticLabel label_from_code(int code) {
  if (code >= 0 && code <= 6) return static_cast<SemanticLabel>(code);
  return SemanticLabel::kUnlabeled;
}

std::string_view label_name(SemanticLabel l) {
  switch (l) {
    case SemanticLabel::kGround:
      return "ground";
    case SemanticLabel::kTrunk:
      return "trunk";
    case SemanticLabel::kBranch:
      return "branch";
    case SemanticLabel::kSign:
      return "sign";
    case SemanticLabel::kMarker:
      return "marker";
    case SemanticLabel::kCalibration:
      return "calibration";
    case SemanticLabel::kRoof:
      return "roof";
    case SemanticLabel::kUnlabeled:
      return "unlabeled";
  }
  return "unlabeled";
}

void LabeledPointCloud::reserve(std::size_t n) {
  positions.reserve(n);
  colors.reserve(n);
  labels.reserve(n);
}

void LabeledPointCloud::push_back(const Vec3& p, const Vec3& rgb, SemanticLabel label) {
  positions.push_back(p);
  colors.push_back(rgb);
  labels.push_back(label);
}

LabeledPointCloud LabeledPointCloud::subset(const std::vector<std::size_t>& indices) const {
  LabeledPointCloud out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(positions.at(i), colors.at(i), labels.at(i));
  return out;
}

LabeledPointCloud LabeledPointCloud::filter(const std::vector<bool>& keep) const {
  if (keep.size() != size()) throw InputError("filter mask length does not match cloud size");
  LabeledPointCloud out;
  out.reserve(static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true)));
  for (std::size_t i = 0; i < size(); ++i) {
    if (keep[i]) out.push_back(positions[i], colors[i], labels[i]);
  }
  return out;
}

void LabeledPointCloud::validate() const {
  if (colors.size() != positions.size() || labels.size() != positions.size()) {
    throw InputError("point cloud arrays have mismatched lengths");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!positions[i].allFinite()) {
      throw InputError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
    const Vec3& c = colors[i];
    if (!c.allFinite() || (c.array() < 0.0).any() || (c.array() > 1.0).any()) {
      throw InputError("point " + std::to_string(i) + " has a color outside [0,1]");
    }
  }
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

const CameraPose* CameraModel::find(int image_id) const {
  for (const auto& p : poses) {
    if (p.image_id == image_id) return &p;
  }
  return nullptr;
}

void CameraModel::validate() const {
  if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
    throw InputError("camera focal lengths must be positive");
  }
  for (const auto& p : poses) {
    const double ortho =
        (p.rotation.transpose() * p.rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = p.rotation.determinant();
    if (ortho > 1e-9 || std::abs(det - 1.0) > 1e-9) {
      throw InputError("image " + std::to_string(p.image_id) + " has a non-rotation pose matrix");
    }
    if (!p.origin.allFinite()) {
      throw InputError("image " + std::to_string(p.image_id) + " has a non-finite origin");
    }
  }
}

void MarkerObservation::validate() const {
  for (int a = 0; a < 4; ++a) {
    if (!corners[a].allFinite()) {
      throw InputError("marker in image " + std::to_string(image_id) + " has a non-finite corner");
    }
    for (int b = a + 1; b < 4; ++b) {
      if (corners[a] == corners[b]) {
        throw InputError("marker in image " + std::to_string(image_id) + " has coincident corners");
      }
    }
  }
  double area2 = 0.0;
  for (int a = 0; a < 4; ++a) {
    const Vec2& p = corners[a];
    const Vec2& q = corners[(a + 1) % 4];
    area2 += p.x() * q.y() - q.x() * p.y();
  }
  if (!(std::abs(area2) > 0.0)) {
    throw InputError("marker in image " + std::to_string(image_id) + " is a degenerate quad");
  }
}

std::vector<std::size_t> SkeletonGraph::degrees() const {
  std::vector<std::size_t> deg(nodes.size(), 0);
  for (const auto& [a, b] : edges) {
    ++deg.at(a);
    ++deg.at(b);
  }
  return deg;
}

std::vector<std::vector<std::size_t>> SkeletonGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const auto& [a, b] : edges) {
    adj.at(a).push_back(b);
    adj.at(b).push_back(a);
  }
  return adj;
}

bool SkeletonGraph::is_tree() const {
  if (nodes.empty()) return edges.empty();
  if (edges.size() != nodes.size() - 1) return false;
  const auto adj = adjacency();
  std::vector<bool> seen(nodes.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t visited = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == nodes.size();
}

double SkeletonGraph::total_length() const {
  double sum = 0.0;
  for (const auto& [a, b] : edges) sum += (nodes.at(a) - nodes.at(b)).norm();
  return sum;
}

}  // namespace treeskel
