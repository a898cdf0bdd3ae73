#pragma once

#include <gsr/core/error.hpp>
#include <gsr/scene/bundle.hpp>

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace gsr {

inline constexpr int kDefaultAreaThreshold = 500;  // pixels

// Per-frame pixel count of every object id present in the frame.
using FrameAreas = std::map<int, long>;

inline FrameAreas mask_areas(const InstanceMask& mask) {
  FrameAreas areas;
  for (auto id : mask.ids) {
    if (id != 0) ++areas[id];
  }
  return areas;
}

// First frame in which each object's area strictly exceeds the threshold.
// Objects that never do are absent from the result.
inline std::map<int, int> first_visible_from_areas(std::span<const FrameAreas> frames, long area_thresh) {
  std::map<int, int> first;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const auto& [id, area] : frames[f]) {
      if (area > area_thresh && !first.count(id)) first[id] = static_cast<int>(f);
    }
  }
  return first;
}

inline std::map<int, int> build_frame_metadata(std::span<const InstanceMask> masks,
                                               long area_thresh = kDefaultAreaThreshold) {
  std::vector<FrameAreas> areas;
  areas.reserve(masks.size());
  for (const auto& m : masks) areas.push_back(mask_areas(m));
  return first_visible_from_areas(areas, area_thresh);
}

// Uses the bundle's masks when every frame has one; otherwise falls back to
// first_visible_frame values recorded in objects.json.
inline std::map<int, int> build_frame_metadata(const SceneBundle& bundle,
                                               long area_thresh = kDefaultAreaThreshold) {
  bool all_masks = !bundle.frames.empty();
  for (const auto& f : bundle.frames) all_masks = all_masks && f.mask.has_value();
  if (all_masks) {
    std::vector<InstanceMask> masks;
    masks.reserve(bundle.frames.size());
    for (const auto& f : bundle.frames) masks.push_back(*f.mask);
    return build_frame_metadata(masks, area_thresh);
  }
  std::map<int, int> first;
  for (const auto& o : bundle.objects) {
    if (o.first_visible_frame) first[o.id] = *o.first_visible_frame;
  }
  return first;
}

}  // namespace gsr
