#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/types.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace gsr {

// Pinhole intrinsics in factored form. Camera frame: +z forward, +x right,
// +y down.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  bool valid_for(int width, int height) const {
    return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 && cy < height;
  }
};

// Camera-to-world pose.
using Pose = RigidTransform;

// Row-major H×W raster with a per-pixel validity mask.
template <typename T>
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<T> values;
  std::vector<std::uint8_t> valid;

  Raster() = default;
  Raster(int w, int h, T fill = T{})
      : width(w), height(h), values(std::size_t(w) * h, fill), valid(std::size_t(w) * h, 0) {}

  std::size_t index(int u, int v) const { return std::size_t(v) * width + u; }
  std::size_t size() const { return values.size(); }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto b : valid) n += b != 0;
    return n;
  }
};

// Depths in meters. Invalid when zero or non-finite.
struct DepthMap : Raster<double> {
  using Raster::Raster;

  void set(int u, int v, double depth) {
    values[index(u, v)] = depth;
    valid[index(u, v)] = std::isfinite(depth) && depth > 0;
  }
};

// World-frame point per pixel.
struct PointMap : Raster<Vec3> {
  using Raster::Raster;
  PointMap() = default;
  PointMap(int w, int h) : Raster(w, h, Vec3::Zero()) {}
};

// Lifts pixel (u, v) at the given depth to the camera frame.
inline Vec3 unproject_pixel(const CameraIntrinsics& k, double u, double v, double depth) {
  return depth * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
}

inline PointMap back_project(const DepthMap& depth, const CameraIntrinsics& k, const Pose& pose) {
  if (depth.width <= 0 || depth.height <= 0 ||
      depth.values.size() != std::size_t(depth.width) * depth.height ||
      depth.valid.size() != depth.values.size()) {
    throw InputError("back_project: depth raster dimensions are inconsistent");
  }
  if (!k.valid_for(depth.width, depth.height)) {
    throw InputError("back_project: intrinsics do not fit a " + std::to_string(depth.width) +
                     "x" + std::to_string(depth.height) + " depth map");
  }
  PointMap out(depth.width, depth.height);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const std::size_t i = depth.index(u, v);
      if (!depth.valid[i]) continue;
      out.values[i] = pose.apply(unproject_pixel(k, u, v, depth.values[i]));
      out.valid[i] = 1;
    }
  }
  return out;
}

struct PixelDepth {
  double u;
  double v;
  double depth;
};

// Inverse of back_project for a single world point. Empty when the point is
// behind the camera.
inline std::optional<PixelDepth> project(const Vec3& world, const CameraIntrinsics& k,
                                         const Pose& pose) {
  const Vec3 c = pose.inverse().apply(world);
  if (c.z() <= 0) return std::nullopt;
  return PixelDepth{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy, c.z()};
}

}  // namespace gsr
