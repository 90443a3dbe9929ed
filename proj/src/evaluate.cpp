// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/evaluate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include "treeskel/error.hpp"
#include "treeskel/geometry.hpp"
#include "treeskel/io.hpp"
#include "treeskel/simd/kernels.hpp"
#include "treeskel/spatial.hpp"

namespace treeskel::evaluate {

void SyntheticTreeParams::validate() const {
  if (!(trunk_height > 0.0) || !(trunk_radius > 0.0) || !(point_density > 0.0)) {
    throw InputError("tree height, radius and density must be positive");
  }
  if (branch_levels < 0 || branches_per_level < 0) {
    throw InputError("branch levels and counts must be non-negative");
  }
  if (!(length_decay > 0.0 && length_decay < 1.0) || !(radius_decay > 0.0 && radius_decay < 1.0)) {
    throw InputError("decay factors must lie in (0, 1)");
  }
}

std::vector<Vec3> GroundTruthSkeleton::densify(double spacing) const {
  if (!(spacing > 0.0)) throw InputError("skeleton spacing must be positive");
  std::vector<Vec3> out;
  for (const auto& line : polylines) {
    if (line.empty()) continue;
    out.push_back(line.front());
    for (std::size_t s = 1; s < line.size(); ++s) {
      const Vec3 a = line[s - 1];
      const Vec3 b = line[s];
      const int parts = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
      for (int p = 1; p <= parts; ++p)
        out.push_back(a + (b - a) * (static_cast<double>(p) / parts));
    }
  }
  return out;
}

namespace {

struct Segment {
  Vec3 a, b;
  double ra, rb;
};

struct Limb {
  std::vector<Segment> segments;
  bool trunk = false;
  int parent = -1;  // index into limbs
  int level = 0;

  double length() const {
    double l = 0.0;
    for (const auto& s : segments) l += (s.b - s.a).norm();
    return l;
  }
  /// Axis point and radius at arc-length fraction f.
  std::pair<Vec3, double> at(double f) const {
    double target = f * length();
    for (const auto& s : segments) {
      const double len = (s.b - s.a).norm();
      if (target <= len || &s == &segments.back()) {
        const double t = len > 0.0 ? std::clamp(target / len, 0.0, 1.0) : 0.0;
        return {s.a + t * (s.b - s.a), s.ra + t * (s.rb - s.ra)};
      }
      target -= len;
    }
    return {segments.back().b, segments.back().rb};
  }
  Vec3 direction_at(double f) const {
    double target = f * length();
    for (const auto& s : segments) {
      const double len = (s.b - s.a).norm();
      if (target <= len || &s == &segments.back()) return (s.b - s.a).normalized();
      target -= len;
    }
    return (segments.back().b - segments.back().a).normalized();
  }
};

Vec3 any_perpendicular(const Vec3& d) {
  const Vec3 ref = std::abs(d.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  return d.cross(ref).normalized();
}

/// Rotates `d` by `angle` toward a random perpendicular.
Vec3 bend(const Vec3& d, double angle, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> az(0.0, 2.0 * std::numbers::pi);
  const Vec3 e1 = any_perpendicular(d);
  const Vec3 e2 = d.cross(e1);
  const double phi = az(rng);
  const Vec3 side = std::cos(phi) * e1 + std::sin(phi) * e2;
  return (std::cos(angle) * d + std::sin(angle) * side).normalized();
}

Limb make_limb(const Vec3& start, Vec3 dir, double length, double radius, int segments,
               double max_bend, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> bend_angle(0.0, max_bend);
  Limb limb;
  Vec3 p = start;
  const double seg_len = length / segments;
  for (int s = 0; s < segments; ++s) {
    const double r0 = radius * (1.0 - 0.4 * s / segments);
    const double r1 = radius * (1.0 - 0.4 * (s + 1) / segments);
    if (s > 0) {
      dir = bend(dir, bend_angle(rng), rng);
      if (dir.z() < 0.1) dir = (dir + Vec3(0.0, 0.0, 0.2)).normalized();
    }
    const Vec3 q = p + seg_len * dir;
    limb.segments.push_back({p, q, r0, r1});
    p = q;
  }
  return limb;
}

/// Distance from p to the segment axis and the interpolated radius there.
std::pair<double, double> axis_distance(const Segment& s, const Vec3& p) {
  const Vec3 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return {(p - (s.a + t * d)).norm(), s.ra + t * (s.rb - s.ra)};
}

}  // namespace

SyntheticTree generate_synthetic_tree(const SyntheticTreeParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Limb> limbs;
  {
    Limb trunk = make_limb(Vec3::Zero(), Vec3::UnitZ(), params.trunk_height, params.trunk_radius, 8,
                           3.0 * std::numbers::pi / 180.0, rng);
    trunk.trunk = true;
    limbs.push_back(std::move(trunk));
  }
  std::size_t level_begin = 0;
  for (int level = 1; level <= params.branch_levels; ++level) {
    const std::size_t level_end = limbs.size();
    for (std::size_t pi = level_begin; pi < level_end; ++pi) {
      const double parent_len = limbs[pi].length();
      const double parent_r = limbs[pi].segments.front().ra;
      const double azimuth0 = 2.0 * std::numbers::pi * unit(rng);
      for (int c = 0; c < params.branches_per_level; ++c) {
        const double f = 0.35 + 0.55 * (c + 0.5 * unit(rng)) / params.branches_per_level;
        const auto [attach, r_here] = limbs[pi].at(f);
        const Vec3 pdir = limbs[pi].direction_at(f);
        const Vec3 e1 = any_perpendicular(pdir);
        const Vec3 e2 = pdir.cross(e1);
        // Golden-angle phyllotaxis with jitter.
        const double az = azimuth0 + c * 2.39996 + 0.3 * (unit(rng) - 0.5);
        const double tilt = (45.0 + 15.0 * (unit(rng) - 0.5)) * std::numbers::pi / 180.0;
        Vec3 dir = std::cos(tilt) * pdir + std::sin(tilt) * (std::cos(az) * e1 + std::sin(az) * e2);
        if (dir.z() < 0.15) dir = (dir + Vec3(0.0, 0.0, 0.3)).normalized();
        const double len = parent_len * params.length_decay * (0.8 + 0.4 * unit(rng));
        const double radius = std::min(parent_r * params.radius_decay, 0.8 * r_here);
        Limb child = make_limb(attach, dir.normalized(), len, radius, 4,
                               8.0 * std::numbers::pi / 180.0, rng);
        child.parent = static_cast<int>(pi);
        child.level = level;
        limbs.push_back(std::move(child));
      }
    }
    level_begin = level_end;
  }

  SyntheticTree tree;
  const Vec3 bark(0.40, 0.26, 0.13);
  const Vec3 twig(0.47, 0.32, 0.18);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (const auto& limb : limbs) {
    std::vector<Vec3> line{limb.segments.front().a};
    for (const auto& s : limb.segments) line.push_back(s.b);
    tree.skeleton.polylines.push_back(std::move(line));

    const SemanticLabel label = limb.trunk ? SemanticLabel::kTrunk : SemanticLabel::kBranch;
    for (const auto& s : limb.segments) {
      const Vec3 axis = s.b - s.a;
      const double len = axis.norm();
      const Vec3 d = axis / len;
      const Vec3 e1 = any_perpendicular(d);
      const Vec3 e2 = d.cross(e1);
      const double area = std::numbers::pi * (s.ra + s.rb) * len;
      const auto count = static_cast<std::size_t>(std::llround(area * params.point_density));
      for (std::size_t k = 0; k < count; ++k) {
        const double t = unit(rng);
        const double th = angle(rng);
        const double r = s.ra + t * (s.rb - s.ra);
        const Vec3 p = s.a + t * axis + r * (std::cos(th) * e1 + std::sin(th) * e2);
        if (limb.parent >= 0) {
          // Skip samples buried inside the parent limb.
          bool inside = false;
          for (const auto& ps : limbs[limb.parent].segments) {
            const auto [dist, pr] = axis_distance(ps, p);
            if (dist < pr) {
              inside = true;
              break;
            }
          }
          if (inside) continue;
        }
        tree.cloud.push_back(p, limb.trunk ? bark : twig, label);
        tree.sample_radius.push_back(r);
      }
    }
  }
  if (tree.cloud.empty()) throw InputError("tree parameters produce no surface samples");
  return tree;
}

LabeledPointCloud add_noise(const LabeledPointCloud& cloud, double factor, std::uint64_t seed) {
  if (cloud.size() < 2) throw InputError("add_noise needs at least 2 points");
  if (factor < 0.0) throw InputError("noise factor must be non-negative");
  LabeledPointCloud out = cloud;
  if (factor == 0.0) return out;
  const double sigma = factor * mean_nearest_neighbor_distance(cloud.positions);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (auto& p : out.positions) {
    const double dx = gauss(rng);
    const double dy = gauss(rng);
    const double dz = gauss(rng);
    p += Vec3(dx, dy, dz);
  }
  return out;
}

LabeledPointCloud punch_holes(const LabeledPointCloud& cloud, std::size_t count, double radius,
                              std::uint64_t seed) {
  if (radius < 0.0) throw InputError("hole radius must be non-negative");
  std::vector<std::size_t> trunk;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] == SemanticLabel::kTrunk) trunk.push_back(i);
  }
  if (trunk.empty()) throw InputError("punch_holes needs at least one trunk point");
  std::mt19937_64 rng(seed);
  std::shuffle(trunk.begin(), trunk.end(), rng);
  trunk.resize(std::min(count, trunk.size()));

  const KdTree tree(cloud.positions);
  std::vector<bool> keep(cloud.size(), true);
  for (std::size_t c : trunk) {
    keep[c] = false;
    for (const auto& nb : tree.radius(cloud.positions[c], radius)) keep[nb.index] = false;
  }
  return cloud.filter(keep);
}

LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw InputError("voxel size must be positive");
  struct Cell {
    Vec3 sum = Vec3::Zero();
    Vec3 color = Vec3::Zero();
    std::array<std::size_t, 8> votes{};  // codes 0..6, slot 7 = unlabeled
    std::size_t count = 0;
  };
  std::map<std::array<long long, 3>, Cell> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    const std::array<long long, 3> key{static_cast<long long>(std::floor(p.x() / voxel_size)),
                                       static_cast<long long>(std::floor(p.y() / voxel_size)),
                                       static_cast<long long>(std::floor(p.z() / voxel_size))};
    Cell& c = cells[key];
    c.sum += p;
    c.color += cloud.colors[i];
    const auto code = label_code(cloud.labels[i]);
    ++c.votes[code <= 6 ? code : 7];
    ++c.count;
  }
  LabeledPointCloud out;
  out.reserve(cells.size());
  for (const auto& [key, c] : cells) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < c.votes.size(); ++s) {
      if (c.votes[s] > c.votes[best]) best = s;
    }
    const SemanticLabel label =
        best == 7 ? SemanticLabel::kUnlabeled : static_cast<SemanticLabel>(best);
    const double n = static_cast<double>(c.count);
    out.push_back(c.sum / n, (c.color / n).cwiseMax(0.0).cwiseMin(1.0), label);
  }
  return out;
}

double chamfer_distance(std::span<const Vec3> x, std::span<const Vec3> y) {
  if (x.empty() || y.empty()) throw InputError("chamfer_distance of an empty set");
  auto directed = [](std::span<const Vec3> from, std::span<const Vec3> to) {
    double sum = 0.0;
    if (from.size() * to.size() <= 65536) {
      const simd::KernelTable& kern = simd::active_kernels();
      const simd::PointsSoA soa(to);
      for (const auto& p : from) {
        sum += kern.nearest_sq(soa.x.data(), soa.y.data(), soa.z.data(), soa.size(), p.data());
      }
    } else {
      const KdTree tree(to);
      for (const auto& p : from) sum += tree.nearest(p).sq_dist;
    }
    return sum / static_cast<double>(from.size());
  };
  return directed(x, y) + directed(y, x);
}

std::string_view algorithm_name(Algorithm a) { return a == Algorithm::kLbc ? "LBC" : "S-LBC"; }

std::string_view corruption_name(Corruption c) {
  return c == Corruption::kNoise ? "noise" : "noise+occlusion";
}

double ComparisonReport::mean(Algorithm a, Corruption c) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.algorithm == a && r.corruption == c) {
      sum += r.chamfer;
      ++n;
    }
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

void ComparisonReport::write_rows(std::ostream& out) const {
  out << "tree_id,algorithm,corruption,chamfer,points,iterations\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.tree_id << ',' << algorithm_name(r.algorithm) << ',' << corruption_name(r.corruption)
        << ',' << r.chamfer << ',' << r.points << ',' << r.iterations << '\n';
  }
}

void ComparisonReport::write_summary(std::ostream& out) const {
  out << std::left << std::setw(30) << "Skeleton algorithm" << "Chamfer [cm^2]\n";
  for (Corruption c : {Corruption::kNoise, Corruption::kNoiseOcclusion}) {
    for (Algorithm a : {Algorithm::kLbc, Algorithm::kSlbc}) {
      const std::string label = std::string(algorithm_name(a)) + " with " +
                                (c == Corruption::kNoise ? "noise" : "noise & occlusion");
      out << std::left << std::setw(30) << label << std::fixed << std::setprecision(3)
          << mean(a, c) * 1e4 << '\n';
    }
  }
  out << std::defaultfloat;
}

LabeledPointCloud corrupt(const SyntheticTree& tree, const DatasetParams& params,
                          Corruption corruption, std::uint64_t seed) {
  LabeledPointCloud cloud = add_noise(tree.cloud, params.noise_factor, seed);
  if (corruption == Corruption::kNoiseOcclusion) {
    cloud = punch_holes(cloud, params.hole_count, params.hole_radius, seed + 1);
  }
  return voxel_downsample(cloud, params.voxel_size);
}

SyntheticTreeParams tree_params(const DatasetParams& params, int index) {
  SyntheticTreeParams p = params.tree;
  p.seed = params.seed * 1000003ULL + static_cast<std::uint64_t>(index);
  std::mt19937_64 rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  p.trunk_height *= jitter(rng);
  p.trunk_radius *= jitter(rng);
  return p;
}

ComparisonReport run_comparison(const DatasetParams& dataset,
                                const contraction::ContractionParams& contraction,
                                const std::filesystem::path& artifact_dir) {
  if (dataset.trees < 1) throw InputError("dataset needs at least one tree");
  contraction.validate();
  if (!artifact_dir.empty()) std::filesystem::create_directories(artifact_dir);
  ComparisonReport report;
  for (int t = 0; t < dataset.trees; ++t) {
    const SyntheticTreeParams tp = tree_params(dataset, t);
    const SyntheticTree tree = generate_synthetic_tree(tp);
    const std::vector<Vec3> truth = tree.skeleton.densify(dataset.skeleton_spacing);
    const std::string tag = "tree" + std::to_string(t);
    if (!artifact_dir.empty()) {
      SkeletonGraph gt;
      for (const auto& line : tree.skeleton.polylines) {
        for (std::size_t i = 0; i < line.size(); ++i) {
          gt.nodes.push_back(line[i]);
          if (i > 0) gt.edges.emplace_back(gt.nodes.size() - 2, gt.nodes.size() - 1);
        }
      }
      io::write_graph(gt, artifact_dir / (tag + "_skeleton.txt"), io::GraphFormat::kEdgeList);
    }
    for (Corruption c : {Corruption::kNoise, Corruption::kNoiseOcclusion}) {
      const LabeledPointCloud input = corrupt(tree, dataset, c, tp.seed + 17);
      const std::string ctag = tag + (c == Corruption::kNoise ? "_noise" : "_occluded");
      if (!artifact_dir.empty()) io::write_ply(input, artifact_dir / (ctag + "_input.ply"));
      for (Algorithm a : {Algorithm::kLbc, Algorithm::kSlbc}) {
        const auto result = a == Algorithm::kLbc ? contraction::contract_lbc(input, contraction)
                                                 : contraction::contract_slbc(input, contraction);
        const double cd = chamfer_distance(result.cloud.positions, truth);
        report.rows.push_back({t, a, c, cd, input.size(), static_cast<int>(result.log.size())});
        if (!artifact_dir.empty()) {
          io::write_ply(result.cloud,
                        artifact_dir / (ctag + (a == Algorithm::kLbc ? "_lbc.ply" : "_slbc.ply")));
        }
      }
    }
  }
  return report;
}

}  // namespace treeskel::evaluate
