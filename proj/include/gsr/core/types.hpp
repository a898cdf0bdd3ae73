#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>

namespace gsr {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

// Axis-aligned box given by its min and max corners, in meters.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  // Builds a box from two opposite corners in any order.
  static Aabb from_corners(const Vec3& a, const Vec3& b) {
    return {a.cwiseMin(b), a.cwiseMax(b)};
  }

  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double volume() const {
    const Vec3 e = extent();
    return std::max(0.0, e.x()) * std::max(0.0, e.y()) * std::max(0.0, e.z());
  }
  double diagonal() const { return extent().norm(); }

  bool valid() const {
    return min.allFinite() && max.allFinite() && (min.array() <= max.array()).all();
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  // Euclidean distance from p to the closest point of the box; 0 inside.
  double distance_to(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(Vec3::Zero());
    return d.norm();
  }

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i) {
      out[i] = Vec3((i & 1) ? max.x() : min.x(), (i & 2) ? max.y() : min.y(),
                    (i & 4) ? max.z() : min.z());
    }
    return out;
  }

  friend bool operator==(const Aabb& a, const Aabb& b) {
    return a.min == b.min && a.max == b.max;
  }
};

// Box enclosing a range of points. The range must be non-empty.
template <typename Range>
Aabb bounding_box(const Range& points) {
  auto it = std::begin(points);
  Aabb box{*it, *it};
  for (; it != std::end(points); ++it) box.expand(*it);
  return box;
}

// Rigid transform x -> rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  // this ∘ other: first other, then this.
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }
};

// True when r is orthonormal with determinant +1 within tol.
inline bool is_rotation(const Mat3& r, double tol = 1e-6) {
  if (!r.allFinite()) return false;
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace gsr
