// Copyright 2026 The treeskel Authors
// SPDX-License-Identifier: Apache-2.0

#include "treeskel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "treeskel/error.hpp"

namespace treeskel::geometry {

Pca principal_axes(std::span<const Vec3> points) {
  if (points.empty()) throw InputError("principal_axes of an empty point set");
  Vec3 c = Vec3::Zero();
  for (const auto& p : points) c += p;
  c /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - c;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  return {c, es.eigenvalues(), es.eigenvectors()};
}

namespace {

struct Circumcircle {
  Vec2 center;
  double r2;
};

Circumcircle circumcircle(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d =
      2.0 * (a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) + c.x() * (a.y() - b.y()));
  if (d == 0.0) return {Vec2::Zero(), std::numeric_limits<double>::infinity()};
  const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), c2 = c.squaredNorm();
  const Vec2 center((a2 * (b.y() - c.y()) + b2 * (c.y() - a.y()) + c2 * (a.y() - b.y())) / d,
                    (a2 * (c.x() - b.x()) + b2 * (a.x() - c.x()) + c2 * (b.x() - a.x())) / d);
  return {center, (a - center).squaredNorm()};
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

}  // namespace

std::vector<Triangle> delaunay_2d(std::span<const Vec2> input) {
  const int n = static_cast<int>(input.size());
  if (n < 3) return {};
  // Normalize to a unit box around the centroid for conditioning.
  Vec2 lo = input[0], hi = input[0];
  for (const auto& p : input) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = std::max((hi - lo).maxCoeff(), std::numeric_limits<double>::min());
  const Vec2 mid = 0.5 * (lo + hi);
  std::vector<Vec2> pts;
  pts.reserve(n + 3);
  for (const auto& p : input) pts.push_back((p - mid) / scale);
  // Super-triangle vertices n, n+1, n+2.
  pts.emplace_back(-100.0, -100.0);
  pts.emplace_back(100.0, -100.0);
  pts.emplace_back(0.0, 100.0);

  struct Tri {
    Triangle v;
    Circumcircle cc;
  };
  std::vector<Tri> tris{{{n, n + 1, n + 2}, circumcircle(pts[n], pts[n + 1], pts[n + 2])}};

  for (int i = 0; i < n; ++i) {
    const Vec2& p = pts[i];
    bool duplicate = false;
    for (int j = 0; j < i; ++j) {
      if (pts[j] == p) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;

    std::map<std::pair<int, int>, int> edge_count;
    std::vector<Tri> kept;
    kept.reserve(tris.size() + 2);
    for (const auto& t : tris) {
      if ((p - t.cc.center).squaredNorm() < t.cc.r2) {
        for (int e = 0; e < 3; ++e) {
          int a = t.v[e], b = t.v[(e + 1) % 3];
          if (a > b) std::swap(a, b);
          ++edge_count[{a, b}];
        }
      } else {
        kept.push_back(t);
      }
    }
    for (const auto& [edge, count] : edge_count) {
      if (count != 1) continue;
      Triangle v{edge.first, edge.second, i};
      const double o = orient(pts[v[0]], pts[v[1]], pts[v[2]]);
      if (o == 0.0) continue;
      if (o < 0.0) std::swap(v[0], v[1]);
      kept.push_back({v, circumcircle(pts[v[0]], pts[v[1]], pts[v[2]])});
    }
    tris = std::move(kept);
  }

  std::vector<Triangle> out;
  for (const auto& t : tris) {
    if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t.v);
  }
  return out;
}

double convex_hull_volume(std::span<const Vec3> points) {
  const int n = static_cast<int>(points.size());
  if (n < 4) return 0.0;
  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  if (!(diag > 0.0)) return 0.0;
  const double eps = 1e-10 * diag;

  // Initial tetrahedron from extreme points.
  int i0 = 0, i1 = 0;
  {
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    for (int i = 0; i < n; ++i) {
      if (points[i][axis] < points[i0][axis]) i0 = i;
      if (points[i][axis] > points[i1][axis]) i1 = i;
    }
  }
  const Vec3 dir = (points[i1] - points[i0]).normalized();
  int i2 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const Vec3 d = points[i] - points[i0];
    const double dist = (d - d.dot(dir) * dir).norm();
    if (dist > best) {
      best = dist;
      i2 = i;
    }
  }
  if (i2 < 0) return 0.0;
  const Vec3 base_n = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(base_n.dot(points[i] - points[i0]));
    if (dist > best) {
      best = dist;
      i3 = i;
    }
  }
  if (i3 < 0) return 0.0;

  const Vec3 interior = 0.25 * (points[i0] + points[i1] + points[i2] + points[i3]);

  struct Face {
    std::array<int, 3> v;
    Vec3 normal;
    double offset;
    std::vector<int> outside;
    bool alive = true;
  };
  std::vector<Face> faces;
  auto make_face = [&](int a, int b, int c) {
    Vec3 nrm = (points[b] - points[a]).cross(points[c] - points[a]);
    const double len = nrm.norm();
    if (len > 0.0) nrm /= len;
    if (nrm.dot(interior - points[a]) > 0.0) {
      std::swap(b, c);
      nrm = -nrm;
    }
    Face f;
    f.v = {a, b, c};
    f.normal = nrm;
    f.offset = nrm.dot(points[a]);
    return f;
  };
  faces.push_back(make_face(i0, i1, i2));
  faces.push_back(make_face(i0, i1, i3));
  faces.push_back(make_face(i0, i2, i3));
  faces.push_back(make_face(i1, i2, i3));

  auto assign = [&](int p, std::size_t first_face) {
    for (std::size_t f = first_face; f < faces.size(); ++f) {
      if (faces[f].alive && faces[f].normal.dot(points[p]) - faces[f].offset > eps) {
        faces[f].outside.push_back(p);
        return;
      }
    }
  };
  for (int i = 0; i < n; ++i) {
    if (i == i0 || i == i1 || i == i2 || i == i3) continue;
    assign(i, 0);
  }

  for (std::size_t cursor = 0;;) {
    // Next live face with outside points.
    std::size_t f = cursor;
    while (f < faces.size() && (!faces[f].alive || faces[f].outside.empty())) ++f;
    if (f == faces.size()) {
      bool any = false;
      for (std::size_t g = 0; g < faces.size(); ++g) {
        if (faces[g].alive && !faces[g].outside.empty()) {
          f = g;
          any = true;
          break;
        }
      }
      if (!any) break;
    }
    cursor = f;
    int apex = faces[f].outside.front();
    double far = -1.0;
    for (int p : faces[f].outside) {
      const double d = faces[f].normal.dot(points[p]) - faces[f].offset;
      if (d > far) {
        far = d;
        apex = p;
      }
    }
    std::vector<std::size_t> visible;
    std::map<std::pair<int, int>, int> directed;
    for (std::size_t g = 0; g < faces.size(); ++g) {
      if (!faces[g].alive) continue;
      if (faces[g].normal.dot(points[apex]) - faces[g].offset > eps) {
        visible.push_back(g);
        for (int e = 0; e < 3; ++e) directed[{faces[g].v[e], faces[g].v[(e + 1) % 3]}] = 1;
      }
    }
    std::vector<int> orphans;
    for (std::size_t g : visible) {
      faces[g].alive = false;
      for (int p : faces[g].outside) {
        if (p != apex) orphans.push_back(p);
      }
      faces[g].outside.clear();
    }
    const std::size_t first_new = faces.size();
    for (const auto& [edge, unused] : directed) {
      if (directed.contains({edge.second, edge.first})) continue;  // interior edge
      Face nf;
      nf.v = {edge.first, edge.second, apex};
      Vec3 nrm =
          (points[edge.second] - points[edge.first]).cross(points[apex] - points[edge.first]);
      const double len = nrm.norm();
      if (len > 0.0) nrm /= len;
      nf.normal = nrm;
      nf.offset = nrm.dot(points[edge.first]);
      faces.push_back(std::move(nf));
    }
    for (int p : orphans) assign(p, first_new);
  }

  double vol = 0.0;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    const Vec3 a = points[f.v[0]] - interior;
    const Vec3 b = points[f.v[1]] - interior;
    const Vec3 c = points[f.v[2]] - interior;
    vol += a.dot(b.cross(c));
  }
  return std::abs(vol) / 6.0;
}

double aabb_volume(std::span<const Vec3> points) {
  if (points.empty()) return 0.0;
  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 e = hi - lo;
  return e.x() * e.y() * e.z();
}

double bounding_volume(std::span<const Vec3> points) {
  const double v = convex_hull_volume(points);
  return v > 0.0 ? v : aabb_volume(points);
}

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-15) {
    if (c > 0.0) return Mat3::Identity();
    Vec3 k = Vec3::UnitX() - Vec3::UnitX().dot(a) * a;
    if (k.norm() < 1e-6) k = Vec3::UnitY() - Vec3::UnitY().dot(a) * a;
    k.normalize();
    return 2.0 * k * k.transpose() - Mat3::Identity();
  }
  const Vec3 k = axis / s;
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return Mat3::Identity() + s * kx + (1.0 - c) * kx * kx;
}

}  // namespace treeskel::geometry
