#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/netpbm.hpp>
#include <gsr/scene/bundle.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

// Scene bundle directory layout:
//
//   intrinsics.txt        fx fy cx cy (ASCII)
//   poses/NNNN.txt        4x4 row-major camera-to-world (ASCII)
//   depth/NNNN.pgm        16-bit binary graymap, millimeters, 0 = invalid
//   rgb/NNNN.ppm          binary pixmap (optional per frame)
//   masks/NNNN.pgm        16-bit instance ids, 0 = background (optional)
//   objects.json          scene id, objects, axis alignment, room area
//   trajectories.json     anchor lists (optional)
namespace gsr {

namespace fs = std::filesystem;

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parses exactly `count` whitespace-separated reals from an ASCII file.
inline std::vector<double> read_reals(const std::string& path, std::size_t count) {
  const std::string text = read_text(path);
  std::vector<double> out;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  for (std::size_t i = 0; i < count; ++i) {
    skip();
    if (pos >= text.size()) {
      throw FormatError(path, pos, "expected " + std::to_string(count) + " numbers, found " + std::to_string(i));
    }
    const char* first = text.data() + pos;
    if (*first == '+') ++first;
    double v = 0;
    const auto res = std::from_chars(first, text.data() + text.size(), v);
    if (res.ec != std::errc() || !std::isfinite(v)) throw FormatError(path, pos, "malformed number");
    out.push_back(v);
    pos = static_cast<std::size_t>(res.ptr - text.data());
  }
  skip();
  if (pos != text.size()) throw FormatError(path, pos, "trailing content after " + std::to_string(count) + " numbers");
  return out;
}

inline bool is_frame_name(const std::string& stem) {
  return stem.size() == 4 && std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string frame_name(std::size_t i) {
  std::ostringstream ss;
  ss << std::setw(4) << std::setfill('0') << i;
  return ss.str();
}

inline Vec3 json_vec3(const nlohmann::json& j, const std::string& path, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw FormatError(path, 0, field + " must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError(path, 0, field + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline CameraIntrinsics read_intrinsics(const std::string& path) {
  const auto v = detail::read_reals(path, 4);
  return {v[0], v[1], v[2], v[3]};
}

inline Pose read_pose(const std::string& path) {
  const auto v = detail::read_reals(path, 16);
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v[r * 4 + c];
  }
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvariantError(path, "last row of the pose matrix must be 0 0 0 1");
  }
  const Pose pose = Pose::from_matrix(m);
  if (!is_rotation(pose.rotation)) {
    throw InvariantError(path, "rotation block is not orthonormal with determinant +1 (tolerance 1e-6)");
  }
  return pose;
}

inline DepthMap read_depth(const std::string& path) {
  const auto img = netpbm::read(path);
  if (img.channels != 1) throw FormatError(path, 0, "depth must be a graymap (P5)");
  if (img.maxval <= 255) throw FormatError(path, 0, "depth must be 16-bit (maxval > 255)");
  DepthMap d(img.width, img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    const double mm = img.samples[i];
    d.values[i] = mm / 1000.0;
    d.valid[i] = img.samples[i] != 0;
  }
  return d;
}

inline RgbImage read_rgb(const std::string& path) {
  const auto img = netpbm::read(path);
  if (img.channels != 3) throw FormatError(path, 0, "rgb must be a pixmap (P6)");
  RgbImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>(img.maxval == 255 ? img.samples[i] : img.samples[i] * 255 / img.maxval);
  }
  return out;
}

inline InstanceMask read_mask(const std::string& path) {
  const auto img = netpbm::read(path);
  if (img.channels != 1) throw FormatError(path, 0, "mask must be a graymap (P5)");
  return {img.width, img.height, img.samples};
}

// Reads objects.json into the bundle's scene-level fields.
inline void read_objects(const std::string& path, SceneBundle& bundle) {
  const std::string text = detail::read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path, e.byte, e.what());
  }
  if (!j.is_object()) throw FormatError(path, 0, "top level must be an object");
  bundle.scene_id = j.value("scene_id", fs::path(path).parent_path().filename().string());
  if (j.contains("axis_align") && !j["axis_align"].is_null()) {
    const auto& a = j["axis_align"];
    if (!a.is_array() || a.size() != 16) throw FormatError(path, 0, "axis_align must be 16 numbers (row-major 4x4)");
    Eigen::Matrix4d m;
    for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = a[i].get<double>();
    const auto t = RigidTransform::from_matrix(m);
    if (!is_rotation(t.rotation)) throw InvariantError(path, "axis_align rotation is not orthonormal");
    bundle.axis_align = t;
  }
  bundle.axis_align_applied = j.value("axis_align_applied", false);
  if (j.contains("room_area") && !j["room_area"].is_null()) bundle.room_area = j["room_area"].get<double>();
  std::set<int> ids;
  for (const auto& o : j.value("objects", nlohmann::json::array())) {
    ObjectRecord rec;
    if (!o.contains("id") || !o["id"].is_number_integer()) throw FormatError(path, 0, "object without integer id");
    rec.id = o["id"].get<int>();
    if (!ids.insert(rec.id).second) throw InvariantError(path, "duplicate object id " + std::to_string(rec.id));
    rec.category = o.value("category", "");
    if (rec.category.empty()) throw InvariantError(path, "object " + std::to_string(rec.id) + " has empty category");
    rec.box.min = detail::json_vec3(o.value("min", nlohmann::json()), path, "min");
    rec.box.max = detail::json_vec3(o.value("max", nlohmann::json()), path, "max");
    if (!rec.box.valid()) throw InvariantError(path, "object " + std::to_string(rec.id) + " has min > max");
    if (o.contains("first_visible_frame") && !o["first_visible_frame"].is_null()) {
      rec.first_visible_frame = o["first_visible_frame"].get<int>();
    }
    bundle.objects.push_back(std::move(rec));
  }
}

inline nlohmann::json objects_json(const SceneBundle& bundle) {
  nlohmann::json j;
  j["scene_id"] = bundle.scene_id;
  if (bundle.axis_align) {
    const Eigen::Matrix4d m = bundle.axis_align->matrix();
    std::vector<double> flat;
    for (int i = 0; i < 16; ++i) flat.push_back(m(i / 4, i % 4));
    j["axis_align"] = flat;
  }
  j["axis_align_applied"] = bundle.axis_align_applied;
  if (bundle.room_area) j["room_area"] = *bundle.room_area;
  j["objects"] = nlohmann::json::array();
  for (const auto& o : bundle.objects) {
    nlohmann::json e{{"id", o.id},
                     {"category", o.category},
                     {"min", {o.box.min.x(), o.box.min.y(), o.box.min.z()}},
                     {"max", {o.box.max.x(), o.box.max.y(), o.box.max.z()}}};
    if (o.first_visible_frame) e["first_visible_frame"] = *o.first_visible_frame;
    j["objects"].push_back(e);
  }
  return j;
}

inline SceneBundle read_bundle(const std::string& dir) {
  SceneBundle bundle;
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw FormatError(dir, 0, "not a directory");
  bundle.scene_id = root.filename().string();
  bundle.intrinsics = read_intrinsics((root / "intrinsics.txt").string());

  std::vector<std::string> stems;
  if (fs::is_directory(root / "depth")) {
    for (const auto& e : fs::directory_iterator(root / "depth")) {
      if (e.path().extension() == ".pgm" && detail::is_frame_name(e.path().stem().string())) {
        stems.push_back(e.path().stem().string());
      }
    }
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw FormatError((root / "depth").string(), 0, "no NNNN.pgm depth frames");

  for (const auto& stem : stems) {
    Frame f;
    f.depth = read_depth((root / "depth" / (stem + ".pgm")).string());
    f.pose = read_pose((root / "poses" / (stem + ".txt")).string());
    const fs::path rgb = root / "rgb" / (stem + ".ppm");
    f.image_ref = "rgb/" + stem + ".ppm";
    if (fs::exists(rgb)) {
      f.image = read_rgb(rgb.string());
      if (f.image.width != f.depth.width || f.image.height != f.depth.height) {
        throw FormatError(rgb.string(), 0, "rgb dimensions differ from depth");
      }
    }
    const fs::path mask = root / "masks" / (stem + ".pgm");
    if (fs::exists(mask)) {
      f.mask = read_mask(mask.string());
      if (f.mask->width != f.depth.width || f.mask->height != f.depth.height) {
        throw FormatError(mask.string(), 0, "mask dimensions differ from depth");
      }
    }
    if (!bundle.intrinsics.valid_for(f.depth.width, f.depth.height)) {
      throw InvariantError((root / "intrinsics.txt").string(),
                           "intrinsics invalid for " + std::to_string(f.depth.width) + "x" +
                               std::to_string(f.depth.height) + " frames");
    }
    if (!bundle.frames.empty() && (f.depth.width != bundle.frames[0].depth.width ||
                                   f.depth.height != bundle.frames[0].depth.height)) {
      throw FormatError((root / "depth" / (stem + ".pgm")).string(), 0, "frame size differs from frame 0");
    }
    bundle.frames.push_back(std::move(f));
  }

  if (fs::exists(root / "objects.json")) read_objects((root / "objects.json").string(), bundle);

  const fs::path traj = root / "trajectories.json";
  if (fs::exists(traj)) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(detail::read_text(traj.string()));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(traj.string(), e.byte, e.what());
    }
    for (const auto& t : j) {
      Trajectory tr;
      for (const auto& a : t.at("anchors")) tr.anchors.push_back(detail::json_vec3(a, traj.string(), "anchor"));
      bundle.trajectories.push_back(std::move(tr));
    }
  }
  return bundle;
}

inline void write_bundle(const SceneBundle& bundle, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "poses");
  fs::create_directories(root / "depth");
  {
    std::ofstream out(root / "intrinsics.txt");
    out << std::setprecision(17) << bundle.intrinsics.fx << ' ' << bundle.intrinsics.fy << ' '
        << bundle.intrinsics.cx << ' ' << bundle.intrinsics.cy << '\n';
  }
  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    const Frame& f = bundle.frames[i];
    const std::string stem = detail::frame_name(i);
    {
      std::ofstream out(root / "poses" / (stem + ".txt"));
      out << std::setprecision(17);
      const Eigen::Matrix4d m = f.pose.matrix();
      for (int r = 0; r < 4; ++r) {
        out << m(r, 0) << ' ' << m(r, 1) << ' ' << m(r, 2) << ' ' << m(r, 3) << '\n';
      }
    }
    netpbm::Image d{f.depth.width, f.depth.height, 1, 65535, {}};
    d.samples.resize(f.depth.size());
    for (std::size_t k = 0; k < f.depth.size(); ++k) {
      d.samples[k] = f.depth.valid[k]
                         ? static_cast<std::uint16_t>(std::clamp(std::lround(f.depth.values[k] * 1000.0), 1L, 65535L))
                         : 0;
    }
    netpbm::write((root / "depth" / (stem + ".pgm")).string(), d);
    if (!f.image.empty()) {
      fs::create_directories(root / "rgb");
      netpbm::Image c{f.image.width, f.image.height, 3, 255, {}};
      c.samples.assign(f.image.data.begin(), f.image.data.end());
      netpbm::write((root / "rgb" / (stem + ".ppm")).string(), c);
    }
    if (f.mask) {
      fs::create_directories(root / "masks");
      netpbm::Image m{f.mask->width, f.mask->height, 1, 65535, f.mask->ids};
      netpbm::write((root / "masks" / (stem + ".pgm")).string(), m);
    }
  }
  {
    std::ofstream out(root / "objects.json");
    out << objects_json(bundle).dump(2) << '\n';
  }
  if (!bundle.trajectories.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& t : bundle.trajectories) {
      nlohmann::json anchors = nlohmann::json::array();
      for (const auto& a : t.anchors) anchors.push_back({a.x(), a.y(), a.z()});
      j.push_back({{"anchors", anchors}});
    }
    std::ofstream out(root / "trajectories.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace gsr
