#pragma once

#include <gsr/core/error.hpp>
#include <gsr/gcot/frame_meta.hpp>
#include <gsr/scene/aggregate.hpp>
#include <gsr/scene/axis_align.hpp>
#include <gsr/scene/bundle.hpp>
#include <gsr/scene/room_area.hpp>

#include <cmath>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <set>
#include <vector>

namespace gsr {

// Everything the question generators read about one scene.
struct SceneMetadata {
  std::string scene_id;
  std::vector<ObjectRecord> objects;
  std::optional<double> room_area;       // m²
  std::map<int, int> first_visible;      // object id -> frame index
  std::vector<Trajectory> trajectories;  // in the box frame

  std::map<std::string, std::vector<const ObjectRecord*>> by_category() const {
    std::map<std::string, std::vector<const ObjectRecord*>> out;
    for (const auto& o : objects) out[o.category].push_back(&o);
    return out;
  }

  // Objects whose category occurs exactly once, in id order.
  std::vector<const ObjectRecord*> singletons() const {
    std::vector<const ObjectRecord*> out;
    for (const auto& [cat, objs] : by_category()) {
      if (objs.size() == 1) out.push_back(objs.front());
    }
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
    return out;
  }
};

struct SceneMetadataOptions {
  long area_thresh = kDefaultAreaThreshold;
  double alpha = kDefaultAlpha;
  double voxel = 0.02;  // grid used to thin the aggregated cloud, meters
};

// Keeps the first point of every occupied voxel.
inline std::vector<Vec3> voxel_thin(const std::vector<Vec3>& points, double voxel) {
  std::set<std::tuple<long, long, long>> seen;
  std::vector<Vec3> out;
  for (const auto& p : points) {
    const auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / voxel)),
                                     static_cast<long>(std::floor(p.y() / voxel)),
                                     static_cast<long>(std::floor(p.z() / voxel)));
    if (seen.insert(key).second) out.push_back(p);
  }
  return out;
}

// Aggregated, thinned scene cloud in the frame of the bundle's boxes.
inline std::vector<Vec3> scene_cloud(const SceneBundle& bundle, double voxel) {
  const auto maps = point_maps(bundle);
  return voxel_thin(aggregate_points(maps).points, voxel);
}

// Room area of the cloud after gravity alignment. When the bundle is not
// already aligned, its axis_align transform is used, or estimated if absent.
inline double scene_room_area(const SceneBundle& bundle, const std::vector<Vec3>& cloud, double alpha) {
  if (bundle.axis_align_applied) return compute_room_area(cloud, alpha);
  const RigidTransform t = bundle.axis_align ? *bundle.axis_align : estimate_axis_align(cloud);
  std::vector<Vec3> aligned;
  aligned.reserve(cloud.size());
  for (const auto& p : cloud) aligned.push_back(t.apply(p));
  return compute_room_area(aligned, alpha);
}

inline SceneMetadata scene_metadata(const SceneBundle& bundle, const std::vector<Vec3>* cloud,
                                    const SceneMetadataOptions& opt = {}) {
  SceneMetadata m;
  m.scene_id = bundle.scene_id;
  m.objects = bundle.objects;
  m.first_visible = build_frame_metadata(bundle, opt.area_thresh);
  m.trajectories = bundle.trajectories;
  if (bundle.room_area) {
    m.room_area = bundle.room_area;
  } else if (cloud && cloud->size() >= 3) {
    m.room_area = scene_room_area(bundle, *cloud, opt.alpha);
  }
  return m;
}

}  // namespace gsr
