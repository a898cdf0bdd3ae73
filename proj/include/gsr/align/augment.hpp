#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/random.hpp>
#include <gsr/scene/bundle.hpp>

#include <cmath>
#include <random>

namespace gsr {

// Training-time similarity augmentation x -> Rz(quarter_turns * 90deg) *
// (scale * x) + translation.
struct AugmentParams {
  int quarter_turns = 0;  // 0..3
  double scale = 1.0;     // [0.75, 1.25]
  Vec3 translation = Vec3::Zero();  // each component in [-1, 1] meters

  static constexpr double kMinScale = 0.75;
  static constexpr double kMaxScale = 1.25;
  static constexpr double kMaxShift = 1.0;

  void validate() const {
    if (quarter_turns < 0 || quarter_turns > 3) throw InputError("augment: rotation must be 0, 90, 180 or 270 degrees");
    if (!(scale >= kMinScale && scale <= kMaxScale)) throw InputError("augment: scale outside [0.75, 1.25]");
    if (!translation.allFinite() || translation.cwiseAbs().maxCoeff() > kMaxShift) {
      throw InputError("augment: translation outside [-1, 1] m");
    }
  }

  // Exact integer rotation matrix about +z.
  Mat3 rotation() const {
    static constexpr int c[4] = {1, 0, -1, 0};
    static constexpr int s[4] = {0, 1, 0, -1};
    Mat3 r;
    r << c[quarter_turns], -s[quarter_turns], 0, s[quarter_turns], c[quarter_turns], 0, 0, 0, 1;
    return r;
  }

  Vec3 apply(const Vec3& x) const { return rotation() * (scale * x) + translation; }

  Aabb apply(const Aabb& b) const { return Aabb::from_corners(apply(b.min), apply(b.max)); }

  static AugmentParams sample(Rng& rng) {
    AugmentParams p;
    p.quarter_turns = static_cast<int>(uniform_index(rng, 4));
    p.scale = std::uniform_real_distribution<double>(kMinScale, kMaxScale)(rng);
    std::uniform_real_distribution<double> shift(-kMaxShift, kMaxShift);
    for (int a = 0; a < 3; ++a) p.translation[a] = shift(rng);
    return p;
  }
};

enum class RangeCheck { kEnforce, kUnchecked };

// Applies the augmentation to every world-frame quantity of the bundle.
// Poses get R' = Rz R and t' = Rz (s t) + shift, depths are scaled by s, so
// back-projecting the result reproduces the augmented points.
inline SceneBundle apply_augment(const SceneBundle& bundle, const AugmentParams& params,
                                 RangeCheck check = RangeCheck::kEnforce) {
  if (check == RangeCheck::kEnforce) params.validate();
  if (!(params.scale > 0)) throw InputError("augment: scale must be positive");
  const Mat3 rz = params.rotation();
  SceneBundle out = bundle;
  for (auto& f : out.frames) {
    f.pose.rotation = rz * f.pose.rotation;
    f.pose.translation = params.apply(bundle.frames[&f - out.frames.data()].pose.translation);
    for (std::size_t i = 0; i < f.depth.size(); ++i) {
      if (f.depth.valid[i]) f.depth.values[i] *= params.scale;
    }
  }
  for (auto& o : out.objects) o.box = params.apply(o.box);
  for (auto& t : out.trajectories) {
    for (auto& a : t.anchors) a = params.apply(a);
  }
  if (out.room_area) *out.room_area *= params.scale * params.scale;
  return out;
}

}  // namespace gsr
