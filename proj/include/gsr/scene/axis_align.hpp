#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/random.hpp>
#include <gsr/core/types.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace gsr {

struct AxisAlignOptions {
  int ransac_iterations = 500;
  double inlier_threshold = 0.02;  // meters
  double floor_fraction = 0.3;     // of the pre-rotated z extent
  std::uint64_t seed = 0;
};

namespace detail {

struct PlaneFit {
  Vec3 normal;
  Vec3 centroid;
  Eigen::Vector3d eigenvalues;  // ascending
};

inline PlaneFit fit_plane(std::span<const Vec3> pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= double(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  cov /= double(pts.size());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  return {es.eigenvectors().col(0), c, es.eigenvalues()};
}

inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  return Eigen::Quaterniond::FromTwoVectors(from, to).toRotationMatrix();
}

}  // namespace detail

// Estimates the rigid transform that maps gravity to -z, puts the floor at
// z = 0, centers the cloud in xy and aligns the dominant horizontal principal
// axis with +x (sign chosen so the axis has a non-negative x component).
//
// Gravity comes from a RANSAC floor plane over the lowest part of the cloud
// after a PCA pre-rotation; the provisional up axis is the least-variance
// principal direction oriented towards input +z.
inline RigidTransform estimate_axis_align(std::span<const Vec3> points,
                                          const AxisAlignOptions& opt = {}) {
  if (points.size() < 3) throw EstimationError("estimate_axis_align: need at least 3 points");
  for (const auto& p : points) {
    if (!p.allFinite()) throw InputError("estimate_axis_align: non-finite point");
  }

  const auto global = detail::fit_plane(points);
  const Vec3 spread = global.eigenvalues;
  if (!(spread(2) > 0) || spread(1) <= 1e-12 * spread(2)) {
    throw EstimationError("estimate_axis_align: points are collinear or coincident");
  }

  Vec3 up0 = global.normal;
  if (up0.z() < 0) up0 = -up0;
  const Mat3 pre = detail::rotation_between(up0, Vec3::UnitZ());

  std::vector<Vec3> q(points.size());
  double zmin = INFINITY, zmax = -INFINITY;
  for (std::size_t i = 0; i < points.size(); ++i) {
    q[i] = pre * (points[i] - global.centroid);
    zmin = std::min(zmin, q[i].z());
    zmax = std::max(zmax, q[i].z());
  }
  const double zcut = zmin + opt.floor_fraction * (zmax - zmin);
  std::vector<Vec3> floor;
  for (const auto& p : q) {
    if (p.z() <= zcut) floor.push_back(p);
  }
  if (floor.size() < 3) floor = q;

  const double scale = std::sqrt(spread(2));
  Rng rng(opt.seed);
  std::size_t best_inliers = 0;
  Vec3 best_n = Vec3::UnitZ();
  Vec3 best_p = floor.front();
  for (int it = 0; it < opt.ransac_iterations; ++it) {
    const std::size_t a = uniform_index(rng, floor.size());
    const std::size_t b = uniform_index(rng, floor.size());
    const std::size_t c = uniform_index(rng, floor.size());
    if (a == b || b == c || a == c) continue;
    Vec3 n = (floor[b] - floor[a]).cross(floor[c] - floor[a]);
    if (n.norm() <= 1e-12 * scale * scale) continue;
    n.normalize();
    std::size_t count = 0;
    for (const auto& p : floor) count += std::abs(n.dot(p - floor[a])) < opt.inlier_threshold;
    if (count > best_inliers) {
      best_inliers = count;
      best_n = n;
      best_p = floor[a];
    }
  }

  Vec3 normal = Vec3::UnitZ();
  Vec3 floor_point = best_p;
  if (best_inliers >= 3) {
    std::vector<Vec3> inliers;
    for (const auto& p : floor) {
      if (std::abs(best_n.dot(p - best_p)) < opt.inlier_threshold) inliers.push_back(p);
    }
    const auto refined = detail::fit_plane(inliers);
    normal = refined.eigenvalues(1) > 1e-12 * scale * scale ? refined.normal : best_n;
    floor_point = refined.centroid;
  } else {
    // Floor candidates are collinear; keep the PCA up axis.
    floor_point = *std::min_element(floor.begin(), floor.end(),
                                    [](const Vec3& a, const Vec3& b) { return a.z() < b.z(); });
  }
  if (normal.z() < 0) normal = -normal;

  const Vec3 up = pre.transpose() * normal;
  const Mat3 level = detail::rotation_between(up, Vec3::UnitZ());

  Eigen::Matrix2d cov2 = Eigen::Matrix2d::Zero();
  Vec2 mean2 = Vec2::Zero();
  for (const auto& p : points) mean2 += (level * p).head<2>();
  mean2 /= double(points.size());
  for (const auto& p : points) {
    const Vec2 d = (level * p).head<2>() - mean2;
    cov2 += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(cov2);
  Vec2 axis = es2.eigenvectors().col(1);
  if (axis.x() < 0 || (axis.x() == 0 && axis.y() < 0)) axis = -axis;
  const double angle = std::atan2(axis.y(), axis.x());
  const Mat3 yaw = Eigen::AngleAxisd(-angle, Vec3::UnitZ()).toRotationMatrix();

  RigidTransform out;
  out.rotation = yaw * level;
  const Vec3 floor_world = global.centroid + pre.transpose() * floor_point;
  const Vec3 rc = out.rotation * global.centroid;
  out.translation = Vec3(-rc.x(), -rc.y(), -(out.rotation * floor_world).z());
  return out;
}

}  // namespace gsr
