// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "treeskel/types.hpp"

namespace treeskel::geometry {

/// Principal axes of a point set. Eigenvalues ascending; column i of
/// `axes` belongs to eigenvalues[i].
struct Pca {
  Vec3 centroid;
  Vec3 eigenvalues;
  Mat3 axes;
};

Pca principal_axes(std::span<const Vec3> points);

using Triangle = std::array<int, 3>;

/// Delaunay triangulation of a small 2D point set (Bowyer-Watson).
/// Triangles are counter-clockwise. Exact duplicates of an earlier point
/// are left out of the triangulation.
std::vector<Triangle> delaunay_2d(std::span<const Vec2> points);

/// Volume of the convex hull, or 0 when the points span fewer than three
/// dimensions.
double convex_hull_volume(std::span<const Vec3> points);

/// Product of the axis-aligned bounding box extents.
double aabb_volume(std::span<const Vec3> points);

/// Convex hull volume, falling back to the box-extent product when the
/// hull is degenerate.
double bounding_volume(std::span<const Vec3> points);

/// Rotation taking unit vector `from` onto unit vector `to` (Rodrigues).
/// Antiparallel inputs rotate by 180 degrees about an axis orthogonal to
/// `from`, preferring the x-axis.
Mat3 rotation_between(const Vec3& from, const Vec3& to);

}  // namespace treeskel::geometry
