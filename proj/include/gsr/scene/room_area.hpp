#pragma once

#include <gsr/core/error.hpp>
#include <gsr/scene/delaunay.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace gsr {

inline constexpr double kDefaultAlpha = 0.5;  // meters

// Circumradius of a triangle; infinite when degenerate.
inline double circumradius(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double la = (b - c).norm();
  const double lb = (a - c).norm();
  const double lc = (a - b).norm();
  const double twice_area = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
  if (twice_area == 0) return INFINITY;
  return la * lb * lc / (2.0 * twice_area);
}

// Area of the 2D alpha shape of the xy projection: Delaunay triangles with
// circumradius below alpha, summed with the shoelace formula. Points must
// already be gravity-aligned (floor in the xy plane).
inline double compute_room_area(std::span<const Vec3> points, double alpha = kDefaultAlpha) {
  if (points.size() < 3) throw InputError("compute_room_area: need at least 3 points");
  if (!(alpha > 0)) throw InputError("compute_room_area: alpha must be positive");
  std::vector<Vec2> xy;
  xy.reserve(points.size());
  for (const auto& p : points) xy.push_back(p.head<2>());
  const Triangulation tri = delaunay_2d(xy);
  double area = 0;
  for (const auto& t : tri.triangles) {
    const Vec2& a = tri.vertices[t[0]];
    const Vec2& b = tri.vertices[t[1]];
    const Vec2& c = tri.vertices[t[2]];
    if (circumradius(a, b, c) >= alpha) continue;
    area += 0.5 * std::abs(a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) + c.x() * (a.y() - b.y()));
  }
  return area;
}

}  // namespace gsr
