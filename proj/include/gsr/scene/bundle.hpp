#pragma once

#include <gsr/core/types.hpp>
#include <gsr/scene/camera.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gsr {

// 8-bit RGB raster, row-major, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(std::size_t(w) * h * 3, 0) {}

  bool empty() const { return data.empty(); }
  std::uint8_t* at(int u, int v) { return &data[(std::size_t(v) * width + u) * 3]; }
  const std::uint8_t* at(int u, int v) const { return &data[(std::size_t(v) * width + u) * 3]; }
};

// Per-pixel object id (0 = background) for one frame.
struct InstanceMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> ids;
};

struct ObjectRecord {
  int id = 0;
  std::string category;
  Aabb box;
  std::optional<int> first_visible_frame;
};

struct Frame {
  std::string image_ref;
  RgbImage image;  // empty when the bundle has no rgb/ file for this frame
  DepthMap depth;
  Pose pose;
  std::optional<InstanceMask> mask;
};

// A trajectory of anchor points, e.g. exported from a navigation simulator.
struct Trajectory {
  std::vector<Vec3> anchors;
};

struct SceneBundle {
  std::string scene_id;
  std::vector<Frame> frames;
  CameraIntrinsics intrinsics;
  std::vector<ObjectRecord> objects;
  std::optional<RigidTransform> axis_align;
  // Boxes and poses are already expressed in the axis-aligned frame.
  bool axis_align_applied = false;
  std::optional<double> room_area;
  std::vector<Trajectory> trajectories;
};

// Back-projects every frame of a bundle.
inline std::vector<PointMap> point_maps(const SceneBundle& bundle) {
  std::vector<PointMap> maps;
  maps.reserve(bundle.frames.size());
  for (const auto& f : bundle.frames) maps.push_back(back_project(f.depth, bundle.intrinsics, f.pose));
  return maps;
}

}  // namespace gsr
