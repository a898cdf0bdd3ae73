#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/types.hpp>
#include <gsr/patch/point_set.hpp>

#include <cmath>
#include <numbers>

namespace gsr {

// Sinusoidal encoding of a point normalized to the scene box. Each axis
// (x, y, z in turn) contributes D/6 pairs sin(2^k pi t), cos(2^k pi t).
// An axis with zero extent encodes t = 0.
inline RowVector positional_encode(const Vec3& point, const Aabb& scene_box, int dim) {
  if (dim <= 0 || dim % 6 != 0) throw InputError("positional_encode: dimension must be a positive multiple of 6");
  const int pairs = dim / 6;
  RowVector out(dim);
  for (int a = 0; a < 3; ++a) {
    const double extent = scene_box.max[a] - scene_box.min[a];
    const double t = extent > 0 ? (point[a] - scene_box.min[a]) / extent : 0.0;
    for (int k = 0; k < pairs; ++k) {
      const double phase = std::ldexp(1.0, k) * std::numbers::pi * t;
      out(a * 2 * pairs + 2 * k) = std::sin(phase);
      out(a * 2 * pairs + 2 * k + 1) = std::cos(phase);
    }
  }
  return out;
}

}  // namespace gsr
