#pragma once

// Synthetic furnished room rendered by ray casting. Used by the tests and
// the gsr-fixture tool; the geometry is fixed so expected answers can be
// worked out by hand.

#include <gsr/core/error.hpp>
#include <gsr/scene/bundle.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace gsr::synth {

struct RoomSpec {
  double width = 6.0;   // x extent, meters
  double length = 5.0;  // y extent
  double height = 2.5;  // wall height; the room has no ceiling
};

struct FixtureOptions {
  int frames = 24;
  int image_width = 160;
  int image_height = 128;
  double focal = 100.0;
  double camera_height = 1.5;
  double orbit_radius = 1.0;
  double pitch_deg = 25.0;         // downward tilt of outward-looking frames
  double inward_pitch_deg = 50.0;  // odd frames look back across the room
  // Depths are rounded to multiples of this many millimeters.
  int depth_quantum_mm = 1;
};

// The twelve objects of the fixture room; ids start at 1.
inline std::vector<ObjectRecord> fixture_objects() {
  auto box = [](double x0, double y0, double z0, double x1, double y1, double z1) {
    return Aabb::from_corners(Vec3(x0, y0, z0), Vec3(x1, y1, z1));
  };
  return {
      {1, "table", box(2.0, 1.8, 0.0, 3.2, 2.6, 0.75), std::nullopt},
      {2, "chair", box(2.2, 1.2, 0.0, 2.7, 1.7, 0.9), std::nullopt},
      {3, "chair", box(2.5, 2.7, 0.0, 3.0, 3.2, 0.9), std::nullopt},
      {4, "chair", box(3.3, 2.0, 0.0, 3.8, 2.5, 0.9), std::nullopt},
      {5, "sofa", box(0.2, 3.6, 0.0, 2.2, 4.6, 0.85), std::nullopt},
      {6, "bed", box(4.0, 3.0, 0.0, 5.8, 4.8, 0.6), std::nullopt},
      {7, "cabinet", box(5.3, 0.2, 0.0, 5.8, 1.4, 1.2), std::nullopt},
      {8, "lamp", box(0.3, 0.3, 0.0, 0.6, 0.6, 1.4), std::nullopt},
      {9, "tv", box(2.5, 4.85, 0.8, 3.7, 4.95, 1.5), std::nullopt},
      {10, "plant", box(0.3, 2.2, 0.0, 0.7, 2.6, 1.1), std::nullopt},
      {11, "radiator", box(4.2, 0.05, 0.1, 5.0, 0.2, 0.7), std::nullopt},
      {12, "telephone", box(2.4, 2.0, 0.75, 2.6, 2.2, 0.85), std::nullopt},
  };
}

inline std::vector<Trajectory> fixture_trajectories() {
  return {
      {{Vec3(0.9, 0.9, 0), Vec3(1.6, 0.9, 0), Vec3(1.6, 3.1, 0), Vec3(3.4, 3.3, 0), Vec3(3.5, 4.3, 0)}},
      {{Vec3(4.8, 2.4, 0), Vec3(4.8, 1.9, 0), Vec3(4.8, 1.6, 0), Vec3(1.2, 1.6, 0), Vec3(1.0, 3.2, 0)}},
  };
}

// Camera-to-world pose looking along yaw (from +x towards +y), tilted down.
inline Pose look_pose(const Vec3& eye, double yaw, double pitch) {
  const Vec3 f(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw), -std::sin(pitch));
  const Vec3 r = f.cross(Vec3::UnitZ()).normalized();
  const Vec3 d = f.cross(r);
  Pose p;
  p.rotation.col(0) = r;
  p.rotation.col(1) = d;
  p.rotation.col(2) = f;
  p.translation = eye;
  return p;
}

struct Hit {
  double t = INFINITY;
  int object = 0;  // 0 for walls and floor
  Vec3 normal = Vec3::Zero();
};

// Slab test against the outside of a box; t of entry if it exists.
inline bool ray_box(const Vec3& o, const Vec3& d, const Aabb& b, double& t_hit, Vec3& normal) {
  double t0 = -INFINITY, t1 = INFINITY;
  int axis = -1;
  double sign = 0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return false;
      continue;
    }
    double ta = (b.min[a] - o[a]) / d[a];
    double tb = (b.max[a] - o[a]) / d[a];
    double s = -1;
    if (ta > tb) {
      std::swap(ta, tb);
      s = 1;
    }
    if (ta > t0) {
      t0 = ta;
      axis = a;
      sign = s;
    }
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t0 <= 1e-9 || axis < 0) return false;
  t_hit = t0;
  normal = Vec3::Zero();
  normal[axis] = sign;
  return true;
}

inline Hit cast(const RoomSpec& room, const std::vector<ObjectRecord>& objects, const Vec3& o, const Vec3& d) {
  Hit h;
  // Room shell: floor z=0 and four walls seen from inside.
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) continue;
    const double lo = 0.0, hi = a == 0 ? room.width : a == 1 ? room.length : room.height;
    const double plane = d[a] < 0 ? lo : hi;
    if (a == 2 && plane == hi) continue;  // open top
    const double t = (plane - o[a]) / d[a];
    if (t <= 1e-9 || t >= h.t) continue;
    const Vec3 p = o + t * d;
    const bool inside = p.x() >= -1e-9 && p.x() <= room.width + 1e-9 && p.y() >= -1e-9 &&
                        p.y() <= room.length + 1e-9 && p.z() >= -1e-9 && p.z() <= room.height + 1e-9;
    if (!inside) continue;
    h.t = t;
    h.object = 0;
    h.normal = Vec3::Zero();
    h.normal[a] = d[a] < 0 ? 1 : -1;
  }
  for (const auto& obj : objects) {
    double t;
    Vec3 n;
    if (ray_box(o, d, obj.box, t, n) && t < h.t) {
      h.t = t;
      h.object = obj.id;
      h.normal = n;
    }
  }
  return h;
}

inline std::array<std::uint8_t, 3> category_rgb(const std::string& cat) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : cat) h = (h ^ c) * 16777619u;
  return {static_cast<std::uint8_t>(60 + h % 180), static_cast<std::uint8_t>(60 + (h >> 8) % 180),
          static_cast<std::uint8_t>(60 + (h >> 16) % 180)};
}

inline std::array<std::uint8_t, 3> shade(const std::array<std::uint8_t, 3>& c, const Vec3& n) {
  const double k = 0.6 + 0.4 * std::abs(n.dot(Vec3(0.3, 0.5, 0.81).normalized()));
  return {static_cast<std::uint8_t>(c[0] * k), static_cast<std::uint8_t>(c[1] * k),
          static_cast<std::uint8_t>(c[2] * k)};
}

inline Frame render_frame(const RoomSpec& room, const std::vector<ObjectRecord>& objects,
                          const CameraIntrinsics& k, int width, int height, const Pose& pose, int quantum_mm) {
  Frame f;
  f.pose = pose;
  f.depth = DepthMap(width, height);
  f.image = RgbImage(width, height);
  InstanceMask mask{width, height, std::vector<std::uint16_t>(std::size_t(width) * height, 0)};
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Vec3 dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const Vec3 dir = pose.rotation * dir_cam;
      const Hit h = cast(room, objects, pose.translation, dir);
      std::uint8_t* px = f.image.at(u, v);
      if (!std::isfinite(h.t)) continue;
      // With dir_cam.z == 1 the ray parameter is the camera-frame depth.
      const long mm = std::lround(h.t * 1000.0 / quantum_mm) * quantum_mm;
      if (mm <= 0 || mm > 65535) continue;
      f.depth.set(u, v, mm / 1000.0);
      const Vec3 p = pose.translation + h.t * dir;
      std::array<std::uint8_t, 3> c;
      if (h.object) {
        c = category_rgb(objects[static_cast<std::size_t>(h.object - 1)].category);
        mask.ids[std::size_t(v) * width + u] = static_cast<std::uint16_t>(h.object);
      } else if (h.normal.z() > 0.5) {
        const bool dark = (static_cast<int>(std::floor(p.x() * 2)) + static_cast<int>(std::floor(p.y() * 2))) % 2;
        c = dark ? std::array<std::uint8_t, 3>{110, 100, 90} : std::array<std::uint8_t, 3>{150, 140, 125};
      } else {
        const bool stripe = static_cast<int>(std::floor((p.x() + p.y()) * 4)) % 2;
        c = stripe ? std::array<std::uint8_t, 3>{215, 205, 180} : std::array<std::uint8_t, 3>{200, 190, 165};
      }
      c = shade(c, h.normal);
      px[0] = c[0];
      px[1] = c[1];
      px[2] = c[2];
    }
  }
  f.mask = std::move(mask);
  return f;
}

// Cameras orbit the room center at eye height. Even frames look outward at
// the walls; odd frames look inward and down so the floor is covered too.
inline SceneBundle make_fixture_room(const FixtureOptions& opt = {}, const std::string& scene_id = "fixture_room") {
  if (opt.frames < 1 || opt.image_width < 1 || opt.image_height < 1 || opt.depth_quantum_mm < 1) {
    throw InputError("fixture: frame count, image size and depth quantum must be positive");
  }
  const RoomSpec room;
  SceneBundle b;
  b.scene_id = scene_id;
  b.intrinsics = {opt.focal, opt.focal, opt.image_width / 2.0, opt.image_height / 2.0};
  b.objects = fixture_objects();
  b.trajectories = fixture_trajectories();
  b.axis_align = RigidTransform{};
  b.axis_align_applied = true;
  const Vec3 center(room.width / 2, room.length / 2, opt.camera_height);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < opt.frames; ++i) {
    const double yaw = 2 * pi * i / opt.frames;
    const Vec3 eye = center + opt.orbit_radius * Vec3(std::cos(yaw), std::sin(yaw), 0);
    const bool inward = i % 2 == 1;
    const Pose pose = inward ? look_pose(eye, yaw + pi, opt.inward_pitch_deg * pi / 180)
                             : look_pose(eye, yaw, opt.pitch_deg * pi / 180);
    Frame f = render_frame(room, b.objects, b.intrinsics, opt.image_width, opt.image_height, pose,
                           opt.depth_quantum_mm);
    char ref[32];
    std::snprintf(ref, sizeof ref, "rgb/%04d.ppm", i);
    f.image_ref = ref;
    b.frames.push_back(std::move(f));
  }
  return b;
}

// Copy whose depths are `den/num` of the source depths; with source depths on
// a grid of `num` millimeters the copy is exact and the metric source is
// `num/den` times the copy.
inline SceneBundle scaled_depth_copy(const SceneBundle& src, int num, int den) {
  SceneBundle out = src;
  out.scene_id = src.scene_id + "_scaled";
  for (auto& f : out.frames) {
    for (std::size_t i = 0; i < f.depth.size(); ++i) {
      if (!f.depth.valid[i]) continue;
      const long mm = std::lround(f.depth.values[i] * 1000.0);
      if (mm % num != 0) throw InputError("scaled_depth_copy: source depth is not on the quantum grid");
      f.depth.values[i] = (mm / num * den) / 1000.0;
    }
  }
  return out;
}

}  // namespace gsr::synth
