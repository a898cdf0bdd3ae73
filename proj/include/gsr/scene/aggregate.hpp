#pragma once

#include <gsr/core/error.hpp>
#include <gsr/scene/camera.hpp>

#include <span>
#include <vector>

namespace gsr {

struct PointProvenance {
  int frame = 0;
  int u = 0;
  int v = 0;
};

// Aggregated scene cloud; provenance[i] is the source pixel of points[i].
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<PointProvenance> provenance;

  std::size_t size() const { return points.size(); }
};

// Concatenates valid points frame-major, row-major. Duplicates are kept.
inline PointCloud aggregate_points(std::span<const PointMap> maps) {
  if (maps.empty()) throw InputError("aggregate_points: no point maps");
  PointCloud cloud;
  for (std::size_t f = 0; f < maps.size(); ++f) {
    const PointMap& m = maps[f];
    for (int v = 0; v < m.height; ++v) {
      for (int u = 0; u < m.width; ++u) {
        const std::size_t i = m.index(u, v);
        if (!m.valid[i]) continue;
        cloud.points.push_back(m.values[i]);
        cloud.provenance.push_back({static_cast<int>(f), u, v});
      }
    }
  }
  if (cloud.points.empty()) throw InputError("aggregate_points: every pixel is invalid (empty cloud)");
  return cloud;
}

}  // namespace gsr
