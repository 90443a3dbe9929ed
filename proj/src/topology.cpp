// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/topology.hpp"

#include <algorithm>
#include <limits>

#include "treeskel/error.hpp"
#include "treeskel/simd/kernels.hpp"

namespace treeskel::topology {

std::vector<std::size_t> farthest_point_sampling(std::span<const Vec3> points, std::size_t n,
                                                 FpsStart start) {
  if (n < 1 || n > points.size()) throw InputError("farthest_point_sampling: n out of range");
  const simd::KernelTable& kern = simd::active_kernels();
  const simd::PointsSoA soa(points);
  const std::size_t total = points.size();

  std::size_t first = 0;
  if (start == FpsStart::kFarthestFromCentroid) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : points) c += p;
    c /= static_cast<double>(total);
    std::vector<double> d(total, std::numeric_limits<double>::infinity());
    kern.min_update(soa.x.data(), soa.y.data(), soa.z.data(), total, c.data(), d.data());
    first = kern.argmax(d.data(), total);
  }

  std::vector<std::size_t> selected{first};
  selected.reserve(n);
  std::vector<double> mind(total, std::numeric_limits<double>::infinity());
  while (selected.size() < n) {
    const Vec3& q = points[selected.back()];
    kern.min_update(soa.x.data(), soa.y.data(), soa.z.data(), total, q.data(), mind.data());
    selected.push_back(kern.argmax(mind.data(), total));
  }
  return selected;
}

std::size_t default_fps_count(std::size_t n_points) {
  return std::min(n_points, std::max<std::size_t>(100, n_points / 50));
}

SkeletonGraph minimum_spanning_tree(std::span<const Vec3> points) {
  SkeletonGraph g;
  g.nodes.assign(points.begin(), points.end());
  const std::size_t n = points.size();
  if (n < 2) return g;
  const simd::KernelTable& kern = simd::active_kernels();
  const simd::PointsSoA soa(points);

  // key < 0 marks vertices already in the tree.
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::size_t current = 0;
  key[0] = -1.0;
  for (std::size_t added = 1; added < n; ++added) {
    kern.min_update_tracked(soa.x.data(), soa.y.data(), soa.z.data(), n, points[current].data(),
                            key.data(), parent.data(), static_cast<std::int64_t>(current));
    const std::size_t next = kern.argmin_nonneg(key.data(), n);
    const auto p = static_cast<std::size_t>(parent[next]);
    g.edges.emplace_back(std::min(p, next), std::max(p, next));
    key[next] = -1.0;
    current = next;
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

SkeletonGraph simplify_graph(const SkeletonGraph& graph) {
  if (!graph.is_tree())
    throw InputError("simplify_graph expects a tree (connected, |E| = |V| - 1)");
  const std::size_t n = graph.node_count();
  if (n <= 2) return graph;
  const auto adj = graph.adjacency();
  std::vector<bool> keep(n);
  for (std::size_t v = 0; v < n; ++v) keep[v] = adj[v].size() != 2;

  std::vector<std::size_t> remap(n, static_cast<std::size_t>(-1));
  SkeletonGraph out;
  for (std::size_t v = 0; v < n; ++v) {
    if (keep[v]) {
      remap[v] = out.nodes.size();
      out.nodes.push_back(graph.nodes[v]);
    }
  }
  // Walk from each kept node along every incident chain of degree-2 nodes
  // to the next kept node; record each chain once.
  for (std::size_t v = 0; v < n; ++v) {
    if (!keep[v]) continue;
    for (std::size_t w : adj[v]) {
      std::size_t prev = v;
      std::size_t cur = w;
      while (!keep[cur]) {
        const std::size_t next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
        prev = cur;
        cur = next;
      }
      if (v < cur) out.edges.emplace_back(remap[v], remap[cur]);
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

void export_graph(const SkeletonGraph& graph, const std::filesystem::path& path,
                  io::GraphFormat format) {
  io::write_graph(graph, path, format);
}

}  // namespace treeskel::topology
