// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "treeskel/types.hpp"

namespace treeskel::io {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Reads the `vertex` element of an ASCII or binary_little_endian PLY file.
///
/// x, y, z are required. red/green/blue (uchar, or float in [0,1]) and
/// `label` (uchar) are optional; missing colors default to black and
/// missing labels to unlabeled. Other vertex properties (normals, alpha)
/// are skipped. Throws ParseError naming the line (ASCII) or byte offset
/// (binary) of the first problem.
LabeledPointCloud read_ply(const std::filesystem::path& path);

/// Writes x,y,z as float32 and red,green,blue,label as uchar.
void write_ply(const LabeledPointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Reads cameras.txt and images.txt from a COLMAP text model directory.
///
/// COLMAP stores world-to-camera poses: x_cam = R_q * x_world + t. The
/// returned CameraPose holds the camera-to-world rotation R_q^T and the
/// projection center -R_q^T * t. Only PINHOLE and SIMPLE_PINHOLE cameras
/// are accepted, and all images must share one set of intrinsics.
CameraModel read_colmap_model(const std::filesystem::path& dir);

/// Inverse of read_colmap_model. images.txt gets empty POINTS2D lines.
void write_colmap_model(const CameraModel& model, const std::filesystem::path& dir);

/// One record per line: `image_id u1 v1 u2 v2 u3 v3 u4 v4`, separated by
/// whitespace and/or commas. Blank lines and `#` comments are skipped.
std::vector<MarkerObservation> read_marker_detections(const std::filesystem::path& path);
void write_marker_detections(const std::vector<MarkerObservation>& obs,
                             const std::filesystem::path& path);

/// One `r g b` triple in [0,1] per line.
std::vector<Vec3> read_sky_samples(const std::filesystem::path& path);
void write_sky_samples(const std::vector<Vec3>& samples, const std::filesystem::path& path);

/// One integer label code per line, one line per point.
std::vector<SemanticLabel> read_label_file(const std::filesystem::path& path);

enum class GraphFormat { kEdgeList, kObj };

/// Edge list: `v x y z` node lines then `e i j` (0-based) edge lines.
/// OBJ: `v x y z` then `l i j` (1-based).
void write_graph(const SkeletonGraph& graph, const std::filesystem::path& path, GraphFormat format);
SkeletonGraph read_graph(const std::filesystem::path& path, GraphFormat format);

}  // namespace treeskel::io
