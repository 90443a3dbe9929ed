// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "treeskel/error.hpp"
#include "treeskel/evaluate.hpp"
#include "treeskel/spatial.hpp"

using namespace treeskel;
using namespace treeskel::evaluate;

namespace {

double point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_skeleton(const Vec3& p, const GroundTruthSkeleton& s) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : s.polylines)
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
      best = std::min(best, point_segment(p, line[i], line[i + 1]));
  return best;
}

LabeledPointCloud grid(int n, double h) {
  LabeledPointCloud c;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) c.push_back(Vec3(i * h, j * h, k * h), Vec3(0.1, 0.2, 0.3));
  return c;
}

SyntheticTreeParams small_tree(std::uint64_t seed) {
  SyntheticTreeParams p;
  p.point_density = 1500;
  p.branch_levels = 1;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("bare trunk") {
  auto p = small_tree(1);
  p.branch_levels = 0;
  const auto t = generate_synthetic_tree(p);
  CHECK(t.skeleton.polylines.size() == 1);
  for (auto l : t.cloud.labels) CHECK(l == SemanticLabel::kTrunk);
}

TEST_CASE("samples lie on their cylinders") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto t = generate_synthetic_tree(small_tree(seed));
    REQUIRE(t.sample_radius.size() == t.cloud.size());
    std::set<SemanticLabel> seen(t.cloud.labels.begin(), t.cloud.labels.end());
    CHECK(seen == std::set<SemanticLabel>{SemanticLabel::kTrunk, SemanticLabel::kBranch});
    for (std::size_t i = 0; i < t.cloud.size(); i += 7)
      CHECK(distance_to_skeleton(t.cloud.positions[i], t.skeleton) <= t.sample_radius[i] + 1e-9);
    for (const auto& line : t.skeleton.polylines)
      for (std::size_t i = 0; i + 1 < line.size(); ++i) CHECK((line[i + 1] - line[i]).norm() > 0);
  }
}

TEST_CASE("generator is deterministic") {
  const auto a = generate_synthetic_tree(small_tree(5));
  const auto b = generate_synthetic_tree(small_tree(5));
  CHECK(a.cloud == b.cloud);
  CHECK(a.skeleton.polylines == b.skeleton.polylines);
  CHECK_FALSE(generate_synthetic_tree(small_tree(6)).cloud == a.cloud);
}

TEST_CASE("generator parameter checks") {
  auto p = small_tree(1);
  p.radius_decay = 1.0;
  CHECK_THROWS_AS(generate_synthetic_tree(p), InputError);
  p = small_tree(1);
  p.point_density = 0;
  CHECK_THROWS_AS(generate_synthetic_tree(p), InputError);
  p = small_tree(1);
  p.point_density = 1e-6;
  CHECK_THROWS_AS(generate_synthetic_tree(p), InputError);
}

TEST_CASE("densify spacing") {
  GroundTruthSkeleton s;
  s.polylines = {{Vec3(0, 0, 0), Vec3(0, 0, 1)},
                 {Vec3(0, 0, 1), Vec3(0.25, 0, 1), Vec3(0.25, 0.3, 1)}};
  const auto pts = s.densify(0.1);
  CHECK(std::find(pts.begin(), pts.end(), Vec3(0.25, 0.3, 1)) != pts.end());
  CHECK(std::find(pts.begin(), pts.end(), Vec3(0, 0, 0)) != pts.end());
  for (double z = 0; z <= 1; z += 0.01) CHECK(distance_to_skeleton(Vec3(0, 0, z), s) < 1e-12);
  std::vector<Vec3> probe;
  for (int i = 0; i <= 100; ++i) probe.emplace_back(0, 0, i / 100.0);
  for (const auto& q : probe) {
    double best = 1e9;
    for (const auto& p : pts) best = std::min(best, (p - q).norm());
    CHECK(best <= 0.05 + 1e-12);
  }
  CHECK_THROWS_AS(s.densify(0.0), InputError);
}

TEST_CASE("noise") {
  const auto g = grid(22, 0.5);  // 10648 points
  CHECK(add_noise(g, 0.0, 1) == g);
  const auto n = add_noise(g, 3.0, 2);
  CHECK(n.size() == g.size());
  CHECK(n.labels == g.labels);
  CHECK(n.colors == g.colors);
  for (int axis = 0; axis < 3; ++axis) {
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = n.positions[i][axis] - g.positions[i][axis];
      s += d, s2 += d * d;
    }
    const double m = s / g.size();
    const double sd = std::sqrt(s2 / g.size() - m * m);
    CHECK(std::abs(sd - 1.5) / 1.5 < 0.05);
  }
  CHECK(mean_nearest_neighbor_distance(grid(5, 1.0).positions) == doctest::Approx(1.0));
  LabeledPointCloud one;
  one.push_back(Vec3::Zero());
  CHECK_THROWS_AS(add_noise(one, 1.0, 1), InputError);
}

TEST_CASE("holes") {
  const auto t = generate_synthetic_tree(small_tree(3));
  const auto out = punch_holes(t.cloud, 1, 0.08, 4);
  CHECK(out.size() < t.cloud.size());
  // The removed set must contain the center and a full 8 cm ball around it.
  std::vector<Vec3> removed;
  for (const auto& p : t.cloud.positions)
    if (std::find(out.positions.begin(), out.positions.end(), p) == out.positions.end())
      removed.push_back(p);
  CHECK(removed.size() + out.size() == t.cloud.size());
  bool found_center = false;
  for (const auto& c : removed) {
    bool clear = true;
    for (const auto& p : out.positions)
      if ((p - c).norm() <= 0.08) clear = false;
    found_center = found_center || clear;
  }
  CHECK(found_center);

  const auto zero = punch_holes(t.cloud, 2, 0.0, 5);
  CHECK(zero.size() == t.cloud.size() - 2);

  LabeledPointCloud branch_only;
  branch_only.push_back(Vec3::Zero(), Vec3::Zero(), SemanticLabel::kBranch);
  CHECK_THROWS_AS(punch_holes(branch_only, 1, 0.1, 1), InputError);
}

TEST_CASE("voxel downsampling") {
  const auto pts = testing::random_points(500, 1, 0, 1);
  LabeledPointCloud c;
  for (const auto& p : pts) c.push_back(p, Vec3(0.5, 0.5, 0.5));
  const auto one = voxel_downsample(c, 10.0);
  REQUIRE(one.size() == 1);
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  CHECK((one.positions[0] - centroid / 500.0).norm() < 1e-12);

  const auto g = grid(6, 1.0);
  CHECK(voxel_downsample(g, 0.9).size() == g.size());

  LabeledPointCloud mixed;
  for (int i = 0; i < 3; ++i)
    mixed.push_back(Vec3(0.1 * i, 0, 0), Vec3::Zero(), SemanticLabel::kTrunk);
  mixed.push_back(Vec3(0.05, 0.05, 0), Vec3::Zero(), SemanticLabel::kBranch);
  CHECK(voxel_downsample(mixed, 1.0).labels[0] == SemanticLabel::kTrunk);
  LabeledPointCloud tie;
  tie.push_back(Vec3(0.1, 0, 0), Vec3::Zero(), SemanticLabel::kBranch);
  tie.push_back(Vec3(0.2, 0, 0), Vec3::Zero(), SemanticLabel::kTrunk);
  CHECK(voxel_downsample(tie, 1.0).labels[0] == SemanticLabel::kTrunk);

  const double v = 0.13;
  const auto d = voxel_downsample(c, v);
  CHECK(d.size() <= c.size());
  // Each output point shares a voxel with some input point and sits in that voxel.
  for (const auto& p : d.positions) {
    const Vec3 cell = (p / v).array().floor();
    bool hit = false;
    for (const auto& q : pts) hit = hit || Vec3((q / v).array().floor()) == cell;
    CHECK(hit);
  }
  CHECK_THROWS_AS(voxel_downsample(c, 0.0), InputError);
}

TEST_CASE("chamfer distance") {
  const std::vector<Vec3> x = {Vec3(0, 0, 0)}, y = {Vec3(1, 0, 0)};
  CHECK(chamfer_distance(x, y) == 2.0);
  CHECK(chamfer_distance(x, x) == 0.0);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = testing::random_points(50, seed);
    const auto b = testing::random_points(50, seed + 1000);
    const double cd = chamfer_distance(a, b);
    CHECK(std::abs(cd - oracle::chamfer_brute(a, b)) < 1e-9);
    CHECK(cd == chamfer_distance(b, a));
    CHECK(cd > 0);
    std::vector<Vec3> ta, tb;
    for (const auto& p : a) ta.push_back(p + Vec3(3, -2, 1));
    for (const auto& p : b) tb.push_back(p + Vec3(3, -2, 1));
    CHECK(chamfer_distance(ta, tb) == doctest::Approx(cd).epsilon(1e-9));
    // Same set, different order and multiplicity.
    auto shuffled = a;
    std::reverse(shuffled.begin(), shuffled.end());
    shuffled.push_back(a[0]);
    CHECK(chamfer_distance(a, shuffled) == 0.0);
  }
  CHECK_THROWS_AS(chamfer_distance(x, std::vector<Vec3>{}), InputError);
}

TEST_CASE("comparison on a clean bare trunk") {
  DatasetParams d;
  d.trees = 1;
  d.tree.branch_levels = 0;
  d.tree.point_density = 3000;
  d.noise_factor = 0.0;
  d.hole_count = 0;
  const auto report = run_comparison(d, contraction::ContractionParams{});
  CHECK(report.rows.size() == 4);
  const double l = report.mean(Algorithm::kLbc, Corruption::kNoise);
  const double s = report.mean(Algorithm::kSlbc, Corruption::kNoise);
  MESSAGE("bare trunk CD: LBC ", l, " S-LBC ", s);
  CHECK(l < 1e-3);
  CHECK(s < 1e-3);
  CHECK(std::max(l, s) <= 2.0 * std::min(l, s));

  std::ostringstream summary, rows;
  report.write_summary(summary);
  report.write_rows(rows);
  std::size_t lines = 0;
  for (char ch : summary.str()) lines += ch == '\n';
  CHECK(lines == 5);  // header + four cells
  CHECK(rows.str().rfind("tree_id,algorithm,corruption,chamfer", 0) == 0);
}

TEST_CASE("tree parameters vary per index but stay seeded") {
  DatasetParams d;
  const auto a = tree_params(d, 0), b = tree_params(d, 1);
  CHECK(a.seed != b.seed);
  CHECK(tree_params(d, 1).trunk_height == b.trunk_height);
}
