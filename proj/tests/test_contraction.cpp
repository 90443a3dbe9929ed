// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "oracles.hpp"
#include "treeskel/contraction.hpp"
#include "treeskel/error.hpp"
#include "treeskel/geometry.hpp"

using namespace treeskel;
using namespace treeskel::contraction;

namespace {

LabeledPointCloud cylinder(std::size_t n, double radius, double length, double noise,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, noise);
  LabeledPointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * M_PI * u(rng);
    const double z = length * u(rng);
    c.push_back(Vec3(radius * std::cos(t) + g(rng), radius * std::sin(t) + g(rng), z + g(rng)),
                Vec3(0.4, 0.3, 0.2), SemanticLabel::kTrunk);
  }
  return c;
}

std::vector<Vec3> hexagon() {
  std::vector<Vec3> pts = {Vec3::Zero()};
  for (int i = 0; i < 6; ++i) pts.emplace_back(std::cos(i * M_PI / 3), std::sin(i * M_PI / 3), 0);
  return pts;
}

bool bit_equal(const LabeledPointCloud& a, const LabeledPointCloud& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(a.positions[i].data(), b.positions[i].data(), 3 * sizeof(double)) != 0)
      return false;
  return a.labels == b.labels && a.colors == b.colors;
}

ContractionParams quick_params(int iterations) {
  ContractionParams p;
  p.max_iterations = iterations;
  return p;
}

}  // namespace

TEST_CASE("hexagon one-ring") {
  const auto pts = hexagon();
  const auto nb = build_neighborhoods(pts, 6);
  CHECK(nb.fans[0].size() == 6);
  CHECK(nb.neighbors[0].size() == 6);
  CHECK_FALSE(nb.isolated[0]);

  const auto lap = build_cotangent_laplacian(pts, nb);
  for (int j = 1; j <= 6; ++j) {
    CHECK(std::abs(lap.matrix.coeff(0, j) - 1.0 / std::sqrt(3.0)) < 1e-9);
  }
  CHECK(std::abs(lap.matrix.coeff(0, 0) + 6.0 / std::sqrt(3.0)) < 1e-9);
  CHECK(lap.isolated.empty());
}

TEST_CASE("collinear points get chain adjacency") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(0.1 * i, 0.2 * i, -0.05 * i);
  const auto nb = build_neighborhoods(pts, 6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(nb.isolated[i]);
    CHECK(nb.fans[i].empty());
    CHECK(!nb.neighbors[i].empty());
    CHECK(nb.neighbors[i].size() <= 2);
  }
  CHECK(nb.neighbors[0] == std::vector<std::size_t>{1});
  CHECK(nb.neighbors[7] == std::vector<std::size_t>{6, 8});
  const auto lap = build_cotangent_laplacian(pts, nb);
  CHECK(lap.isolated.size() == pts.size());
  CHECK(lap.matrix.norm() == 0.0);
}

TEST_CASE("coincident neighborhoods") {
  std::vector<Vec3> pts(10, Vec3(1, 1, 1));
  CHECK_THROWS_AS(build_neighborhoods(pts, 4), NumericalError);
  const auto nb = build_neighborhoods(pts, 4, CoincidentPolicy::kIsolate);
  for (bool f : nb.isolated) CHECK(f);
  CHECK_THROWS_AS(build_neighborhoods(hexagon(), 7), InputError);
  CHECK_THROWS_AS(build_neighborhoods(hexagon(), 2), InputError);
}

TEST_CASE("neighborhood adjacency is symmetric") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = oracle::random_patch(150, seed);
    const auto nb = build_neighborhoods(pts, 8);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      CHECK(std::is_sorted(nb.neighbors[i].begin(), nb.neighbors[i].end()));
      for (std::size_t j : nb.neighbors[i]) {
        CHECK(j != i);
        CHECK(std::binary_search(nb.neighbors[j].begin(), nb.neighbors[j].end(), i));
      }
      for (const auto& f : nb.fans[i]) {
        CHECK(std::binary_search(nb.neighbors[i].begin(), nb.neighbors[i].end(), f[0]));
        CHECK(std::binary_search(nb.neighbors[i].begin(), nb.neighbors[i].end(), f[1]));
      }
    }
  }
}

TEST_CASE("Laplacian invariants on random patches") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = oracle::random_patch(200, 1000 + seed);
    const auto nb = build_neighborhoods(pts, 16);
    const auto lap = build_cotangent_laplacian(pts, nb);
    const Eigen::MatrixXd l = Eigen::MatrixXd(lap.matrix);
    CHECK((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(l.rows());
    CHECK((l * ones).cwiseAbs().maxCoeff() < 1e-8);
    const double clamp = 1.0 / std::tan(M_PI / 180.0);
    for (Eigen::Index i = 0; i < l.rows(); ++i)
      for (Eigen::Index j = 0; j < l.cols(); ++j)
        if (i != j) CHECK(std::abs(l(i, j)) <= clamp + 1e-9);
    for (double a : lap.one_ring_area) CHECK(a >= 0.0);
  }
}

TEST_CASE("semantic weights follow the trunk rule") {
  std::mt19937_64 rng(5);
  const auto pts = oracle::random_patch(200, 6);
  const auto lap = build_cotangent_laplacian(pts, build_neighborhoods(pts, 12));
  std::vector<SemanticLabel> labels(pts.size());
  const SemanticLabel pool[] = {SemanticLabel::kTrunk, SemanticLabel::kTrunk, SemanticLabel::kTrunk,
                                SemanticLabel::kBranch, SemanticLabel::kGround};
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = pts[i].x() > 0 ? pool[rng() % 5] : pool[0];
  const auto s = build_semantic_weights(labels, lap, 10.0);
  const Eigen::MatrixXd l = Eigen::MatrixXd(lap.matrix);
  const Eigen::MatrixXd sm = Eigen::MatrixXd(s.matrix);
  std::size_t trunk_rows = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool want = labels[i] == SemanticLabel::kTrunk;
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (j != i && l(i, j) != 0.0 && labels[j] == SemanticLabel::kBranch) want = false;
    CHECK(s.row_weight[i] == (want ? 10.0 : 1.0));
    trunk_rows += want;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (l(i, j) != 0.0 || i == j) CHECK(sm(i, j) == s.row_weight[i]);
    }
  }
  CHECK(trunk_rows > 0);
  CHECK(trunk_rows < labels.size());
  CHECK_THROWS_AS(build_semantic_weights(std::vector<SemanticLabel>(3), lap, 10.0), InputError);
}

TEST_CASE("semantic weights are all ones without trunk labels") {
  const auto pts = oracle::random_patch(100, 7);
  const auto lap = build_cotangent_laplacian(pts, build_neighborhoods(pts, 10));
  for (auto label : {SemanticLabel::kBranch, SemanticLabel::kGround, SemanticLabel::kUnlabeled}) {
    const auto s = build_semantic_weights(std::vector<SemanticLabel>(pts.size(), label), lap, 10.0);
    for (double w : s.row_weight) CHECK(w == 1.0);
    for (Eigen::Index k = 0; k < s.matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(s.matrix, k); it; ++it) CHECK(it.value() == 1.0);
  }
}

TEST_CASE("zero contraction weight is the identity") {
  const auto c = cylinder(500, 0.1, 1.0, 0.002, 3);
  ContractionParams p = quick_params(1);
  p.initial_contraction_weight = 0.0;
  p.initial_attraction_weight = 1.0;
  const auto out = contract_lbc(c, p);
  CHECK(bit_equal(out.cloud, c));

  const auto lap = build_cotangent_laplacian(c.positions, build_neighborhoods(c.positions, 16));
  const std::vector<double> wl(c.size(), 0.0), wh(c.size(), 1.0);
  const auto step = contraction_step(c.positions, lap.matrix, nullptr, wl, wh);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(step[i] == c.positions[i]);
}

TEST_CASE("singular step is a numerical error") {
  const auto pts = oracle::random_patch(60, 8);
  const auto lap = build_cotangent_laplacian(pts, build_neighborhoods(pts, 8));
  const std::vector<double> wl(pts.size(), 1.0), wh(pts.size(), 0.0);
  CHECK_THROWS_AS(contraction_step(pts, lap.matrix, nullptr, wl, wh), NumericalError);
}

TEST_CASE("noisy cylinder contracts onto its axis") {
  // The open rims freeze as rings once they turn one-dimensional, so only the body is bounded.
  for (std::uint64_t seed = 11; seed < 18; ++seed) {
    const auto c = cylinder(2000, 0.1, 2.0, 0.003, seed);
    const auto out = contract_lbc(c, ContractionParams{});
    const auto pca = geometry::principal_axes(c.positions);
    const Vec3 axis = pca.axes.col(2);
    std::vector<double> radial;
    double body_max = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Vec3 d = out.cloud.positions[i] - pca.centroid;
      const double r = (d - d.dot(axis) * axis).norm();
      radial.push_back(r);
      const double z = c.positions[i].z();
      if (z > 0.2 && z < 1.8) body_max = std::max(body_max, r);
    }
    std::sort(radial.begin(), radial.end());
    const double p95 = radial[static_cast<std::size_t>(0.95 * radial.size())];
    MESSAGE("seed ", seed, ": p95 ", p95, ", body max ", body_max, ", ", out.log.size(),
            " iterations");
    CHECK(body_max < 0.02);
    REQUIRE(!out.log.empty());
    CHECK(out.log.front().contraction_weight > 0.0);
  }
}

TEST_CASE("volume ratio is non-increasing on a cylinder") {
  const auto out = contract_lbc(cylinder(1500, 0.1, 2.0, 0.002, 12), quick_params(8));
  double prev = 1.0;
  for (const auto& rec : out.log) {
    CHECK(rec.volume_ratio <= prev + 1e-6);
    prev = rec.volume_ratio;
  }
}

TEST_CASE("well separated clusters never mix") {
  auto a = cylinder(600, 0.1, 1.0, 0.002, 13);
  const auto b = cylinder(600, 0.1, 1.0, 0.002, 14);
  const Vec3 ca(0, 0, 0.5), cb(3, 0, 0.5);
  for (std::size_t i = 0; i < b.size(); ++i)
    a.push_back(b.positions[i] + Vec3(3, 0, 0), b.colors[i], b.labels[i]);
  const auto out = contract_lbc(a, quick_params(6));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = (a.positions[i] - ca).norm() < (a.positions[i] - cb).norm();
    const bool out_a = (out.cloud.positions[i] - ca).norm() < (out.cloud.positions[i] - cb).norm();
    CHECK(in_a == out_a);
  }
}

TEST_CASE("S-LBC reduces to LBC") {
  auto c = cylinder(800, 0.1, 1.0, 0.003, 15);
  for (std::size_t i = 0; i < c.size(); i += 3) c.labels[i] = SemanticLabel::kBranch;
  const auto p = quick_params(5);
  const auto lbc = contract_lbc(c, p);

  auto p1 = p;
  p1.lambda_trunk = 1.0;
  CHECK(bit_equal(contract_slbc(c, p1).cloud, lbc.cloud));

  auto no_trunk = c;
  for (auto& l : no_trunk.labels) l = SemanticLabel::kBranch;
  CHECK(bit_equal(contract_slbc(no_trunk, p).cloud, contract_lbc(no_trunk, p).cloud));

  // With trunk rows weighted the result differs.
  auto pure = c;
  for (auto& l : pure.labels) l = SemanticLabel::kTrunk;
  const auto s = contract_slbc(pure, p);
  CHECK_FALSE(bit_equal(s.cloud, contract_lbc(pure, p).cloud));
  CHECK(s.log.front().semantic_rows == pure.size());
}

TEST_CASE("contraction is rigid-motion equivariant") {
  const auto c = cylinder(800, 0.1, 1.0, 0.003, 16);
  const Mat3 r = Eigen::AngleAxisd(0.9, Vec3(0.3, -1, 0.4).normalized()).toRotationMatrix();
  const Vec3 t(2, -1, 0.5);
  auto moved = c;
  for (auto& p : moved.positions) p = r * p + t;
  const auto p = quick_params(3);
  const auto a = contract_lbc(c, p);
  const auto b = contract_lbc(moved, p);
  double worst = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    worst = std::max(worst, (r * a.cloud.positions[i] + t - b.cloud.positions[i]).norm());
  CHECK(worst < 1e-6);
}

TEST_CASE("contraction preconditions") {
  ContractionParams p;
  p.contraction_amplification = 1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = ContractionParams{};
  p.lambda_trunk = 0.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = ContractionParams{};
  p.volume_ratio_threshold = 1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  LabeledPointCloud tiny;
  for (int i = 0; i < 3; ++i) tiny.push_back(Vec3(i, 0, 0));
  CHECK_THROWS_AS(contract_lbc(tiny, ContractionParams{}), InputError);
}
