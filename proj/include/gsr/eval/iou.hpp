#pragma once

#include <gsr/core/types.hpp>

#include <algorithm>

namespace gsr {

// Intersection over union of two axis-aligned boxes. Disjoint boxes and a
// zero-volume union score 0.
inline double iou3d(const Aabb& a, const Aabb& b) {
  const Vec3 lo = a.min.cwiseMax(b.min);
  const Vec3 hi = a.max.cwiseMin(b.max);
  const Vec3 e = (hi - lo).cwiseMax(Vec3::Zero());
  const double inter = e.x() * e.y() * e.z();
  const double uni = a.volume() + b.volume() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace gsr
