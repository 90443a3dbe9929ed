// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations shared by the unit tests and the
// acceptance binary. None of these call into the library's algorithms.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "treeskel/types.hpp"

namespace oracle {

using treeskel::CameraModel;
using treeskel::CameraPose;
using treeskel::MarkerObservation;
using treeskel::Mat3;
using treeskel::SkeletonGraph;
using treeskel::Vec2;
using treeskel::Vec3;

// ---- scale harness ----

struct MarkerHarness {
  CameraModel cameras;
  std::vector<MarkerObservation> observations;
  std::array<Vec3, 4> corners;
};

/// `n_cams` pinhole cameras on a circle looking at a square marker of side
/// `side` (scene units) lying in a tilted plane. Pixel noise is Gaussian.
inline MarkerHarness marker_harness(int n_cams, double side, double pixel_noise,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MarkerHarness h;
  h.cameras.intrinsics = {800.0, 820.0, 400.0, 300.0};
  h.cameras.width = 800;
  h.cameras.height = 600;
  const Vec3 center(0.2 * u(rng), 0.2 * u(rng), 0.0);
  const double yaw = M_PI * u(rng);
  const Vec3 ex(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 ey(-std::sin(yaw), std::cos(yaw), 0.0);
  const double s = 0.5 * side;
  h.corners = {center - s * ex - s * ey, center + s * ex - s * ey, center + s * ex + s * ey,
               center - s * ex + s * ey};
  const double phase = M_PI * u(rng);
  for (int c = 0; c < n_cams; ++c) {
    const double a = phase + 2.0 * M_PI * c / n_cams;
    const Vec3 eye(3.0 * std::cos(a), 3.0 * std::sin(a), 2.0 + 0.3 * u(rng));
    const Vec3 f = (center - eye).normalized();
    const Vec3 r = f.cross(Vec3::UnitZ()).normalized();
    const Vec3 d = f.cross(r);
    CameraPose pose;
    pose.image_id = c + 1;
    pose.rotation.col(0) = r;
    pose.rotation.col(1) = d;
    pose.rotation.col(2) = f;
    pose.origin = eye;
    h.cameras.poses.push_back(pose);
    MarkerObservation obs;
    obs.image_id = pose.image_id;
    for (int k = 0; k < 4; ++k) {
      const Vec3 pc = pose.rotation.transpose() * (h.corners[k] - eye);
      const auto& K = h.cameras.intrinsics;
      obs.corners[k] = Vec2(K.fx * pc.x() / pc.z() + K.cx, K.fy * pc.y() / pc.z() + K.cy) +
                       pixel_noise * Vec2(g(rng), g(rng));
    }
    h.observations.push_back(obs);
  }
  return h;
}

// ---- ray intersection: nonlinear CG with golden-section line search ----

template <class F>
double golden_min(F f, double a, double b, int iters = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && std::abs(b - a) > 1e-15 * (1 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d, d = c, fd = fc, c = b - phi * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd, d = a + phi * (b - a), fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Minimizes f over R^3 from x0 using central-difference gradients.
template <class F>
Vec3 minimize3(F f, Vec3 x) {
  auto grad = [&](const Vec3& p) {
    Vec3 gr;
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(p[i]));
      Vec3 a = p, b = p;
      a[i] += h;
      b[i] -= h;
      gr[i] = (f(a) - f(b)) / (2 * h);
    }
    return gr;
  };
  for (int restart = 0; restart < 30; ++restart) {
    Vec3 gr = grad(x);
    Vec3 dir = -gr;
    for (int it = 0; it < 3 && dir.norm() > 0; ++it) {
      auto line = [&](double t) { return f(x + t * dir); };
      // Bracket.
      double hi = 1e-3;
      while (line(hi) < line(0.0) && hi < 1e12) hi *= 4;
      const double t = golden_min(line, -hi * 1e-3, hi);
      x += t * dir;
      const Vec3 g2 = grad(x);
      const double beta = std::max(0.0, g2.dot(g2 - gr) / std::max(gr.squaredNorm(), 1e-300));
      dir = -g2 + beta * dir;
      gr = g2;
    }
  }
  return x;
}

// ---- Chamfer ----

inline double chamfer_brute(const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
  auto one_side = [](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double sum = 0;
    for (const auto& p : a) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
      sum += best;
    }
    return sum / static_cast<double>(a.size());
  };
  return one_side(x, y) + one_side(y, x);
}

// ---- MST ----

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

using Edge = std::pair<std::size_t, std::size_t>;

/// Kruskal over the complete graph, ties broken by (i, j).
inline std::vector<Edge> kruskal(const std::vector<Vec3>& pts) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      all.emplace_back((pts[i] - pts[j]).norm(), i, j);
  std::sort(all.begin(), all.end());
  UnionFind uf(pts.size());
  std::vector<Edge> out;
  for (const auto& [w, i, j] : all)
    if (uf.unite(i, j)) out.emplace_back(i, j);
  std::sort(out.begin(), out.end());
  return out;
}

/// Kruskal over a shuffled edge order, ignoring weights: some spanning tree.
inline double random_spanning_tree_weight(const std::vector<Vec3>& pts, std::mt19937_64& rng) {
  std::vector<Edge> all;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) all.emplace_back(i, j);
  std::shuffle(all.begin(), all.end(), rng);
  UnionFind uf(pts.size());
  double w = 0;
  for (const auto& [i, j] : all)
    if (uf.unite(i, j)) w += (pts[i] - pts[j]).norm();
  return w;
}

inline double graph_weight(const SkeletonGraph& g) {
  double w = 0;
  for (const auto& [a, b] : g.edges) w += (g.nodes[a] - g.nodes[b]).norm();
  return w;
}

// ---- simplify ----

/// Repeatedly scans for the lowest-index degree-2 node and splices it out.
/// Returns the surviving edges as position pairs (sorted).
inline std::set<std::pair<std::array<double, 3>, std::array<double, 3>>> simplify_by_scan(
    const SkeletonGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::set<std::size_t>> adj(n);
  for (const auto& [a, b] : g.edges) adj[a].insert(b), adj[b].insert(a);
  std::vector<bool> alive(n, true);
  std::size_t alive_count = n;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (!alive[v] || adj[v].size() != 2 || alive_count <= 2) continue;
      const std::size_t a = *adj[v].begin();
      const std::size_t b = *std::next(adj[v].begin());
      adj[a].erase(v), adj[b].erase(v);
      adj[a].insert(b), adj[b].insert(a);
      adj[v].clear();
      alive[v] = false;
      --alive_count;
      changed = true;
    }
  }
  auto key = [&](std::size_t i) {
    return std::array<double, 3>{g.nodes[i].x(), g.nodes[i].y(), g.nodes[i].z()};
  };
  std::set<std::pair<std::array<double, 3>, std::array<double, 3>>> out;
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w : adj[v])
      if (v < w) out.insert(std::minmax(key(v), key(w)));
  return out;
}

inline std::set<std::pair<std::array<double, 3>, std::array<double, 3>>> edge_positions(
    const SkeletonGraph& g) {
  std::set<std::pair<std::array<double, 3>, std::array<double, 3>>> out;
  for (const auto& [a, b] : g.edges) {
    const std::array<double, 3> p{g.nodes[a].x(), g.nodes[a].y(), g.nodes[a].z()};
    const std::array<double, 3> q{g.nodes[b].x(), g.nodes[b].y(), g.nodes[b].z()};
    out.insert(std::minmax(p, q));
  }
  return out;
}

/// Positions of nodes with degree 1 (leaves) or >= 3 (junctions).
inline std::multiset<std::array<double, 3>> nodes_with_degree(const SkeletonGraph& g, bool leaves) {
  std::vector<std::size_t> deg(g.nodes.size(), 0);
  for (const auto& [a, b] : g.edges) ++deg[a], ++deg[b];
  std::multiset<std::array<double, 3>> out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (leaves ? deg[i] == 1 : deg[i] >= 3)
      out.insert({g.nodes[i].x(), g.nodes[i].y(), g.nodes[i].z()});
  return out;
}

/// Random recursive tree: node i attaches to a random earlier node.
inline SkeletonGraph random_tree(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  SkeletonGraph t;
  for (std::size_t i = 0; i < n; ++i) {
    t.nodes.emplace_back(g(rng), g(rng), g(rng));
    if (i > 0) {
      // Bias toward the previous node so long degree-2 runs appear.
      const std::size_t p = (rng() % 3 == 0) ? rng() % i : i - 1;
      t.edges.emplace_back(p, i);
    }
  }
  return t;
}

// ---- Laplacian ----

/// Random noisy planar patch in a random orientation.
inline std::vector<Vec3> random_patch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const Vec3 a = Vec3(g(rng), g(rng), g(rng)).normalized();
  Vec3 b = Vec3(g(rng), g(rng), g(rng));
  b = (b - b.dot(a) * a).normalized();
  const Vec3 nrm = a.cross(b);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng), y = u(rng);
    pts.push_back(x * a + y * b + 0.1 * (x * x - y * y) * nrm + 0.01 * u(rng) * nrm);
  }
  return pts;
}

}  // namespace oracle
