// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "treeskel/error.hpp"

namespace treeskel {
namespace {

constexpr std::size_t kLeafSize = 8;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

struct WorseFirst {
  bool operator()(const Neighbor& a, const Neighbor& b) const { return closer(a, b); }
};

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  if (!points_.empty()) build(0, points_.size());
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end, -1, 0.0, 0, 0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident: keep as one leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k, std::size_t exclude) const {
  std::vector<Neighbor> out;
  if (k == 0 || points_.empty()) return out;
  std::priority_queue<Neighbor, std::vector<Neighbor>, WorseFirst> heap;
  auto worst = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().sq_dist;
  };
  // Iterative descent; each stack entry carries a lower bound on the
  // squared distance to its cell along the split axes seen so far.
  struct Item {
    std::size_t node;
    double bound;
  };
  std::vector<Item> stack{{0, 0.0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.bound > worst()) continue;
    const Node& n = nodes_[it.node];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == exclude) continue;
        const Neighbor cand{idx, (points_[idx] - query).squaredNorm()};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (closer(cand, heap.top())) {
          heap.pop();
          heap.push(cand);
        }
      }
      continue;
    }
    const double diff = query[n.axis] - n.split;
    const std::size_t near = diff < 0.0 ? n.left : n.right;
    const std::size_t far = diff < 0.0 ? n.right : n.left;
    stack.push_back({far, std::max(it.bound, diff * diff)});
    stack.push_back({near, it.bound});
  }
  out.resize(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

std::vector<Neighbor> KdTree::radius(const Vec3& query, double radius) const {
  std::vector<Neighbor> out;
  if (points_.empty() || radius < 0.0) return out;
  const double r2 = radius * radius;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        const double d = (points_[idx] - query).squaredNorm();
        if (d <= r2) out.push_back({idx, d});
      }
      continue;
    }
    const double diff = query[n.axis] - n.split;
    // The split point itself lives in the right child.
    if (diff <= radius) stack.push_back(n.left);
    if (diff >= -radius) stack.push_back(n.right);
  }
  std::sort(out.begin(), out.end(), closer);
  return out;
}

Neighbor KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) throw InputError("nearest-neighbor query on an empty tree");
  return knn(query, 1).front();
}

std::vector<double> mean_knn_distances(std::span<const Vec3> points, std::size_t k) {
  if (points.size() <= k) throw InputError("mean_knn_distances needs more than k points");
  const KdTree tree(points);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = tree.knn(points[i], k, i);
    double sum = 0.0;
    for (const auto& n : nn) sum += std::sqrt(n.sq_dist);
    out[i] = sum / static_cast<double>(k);
  }
  return out;
}

double mean_nearest_neighbor_distance(std::span<const Vec3> points) {
  const auto d = mean_knn_distances(points, 1);
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

}  // namespace treeskel
