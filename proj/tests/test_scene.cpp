#include <gsr/scene/aggregate.hpp>
#include <gsr/scene/axis_align.hpp>
#include <gsr/scene/bundle_io.hpp>
#include <gsr/scene/camera.hpp>
#include <gsr/scene/delaunay.hpp>
#include <gsr/scene/room_area.hpp>
#include <gsr/core/random.hpp>
#include <gsr/synth/room.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <filesystem>
#include <fstream>

#include <unistd.h>

using namespace gsr;
namespace fs = std::filesystem;

namespace {

const CameraIntrinsics kK{100, 120, 32, 24};

Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }
Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gsr_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Floor, two walls and a box, elongated along x and centred at the origin.
std::vector<Vec3> room_cloud() {
  std::vector<Vec3> pts;
  for (double x = -2.0; x <= 2.0 + 1e-9; x += 0.1) {
    for (double y = -1.0; y <= 1.0 + 1e-9; y += 0.1) pts.emplace_back(x, y, 0.0);
  }
  for (double x = -2.0; x <= 2.0 + 1e-9; x += 0.1) {
    for (double z = 0.1; z <= 1.0 + 1e-9; z += 0.1) {
      pts.emplace_back(x, -1.0, z);
      pts.emplace_back(x, 1.0, z);
    }
  }
  return pts;
}

double angle_of(const Mat3& r) { return Eigen::AngleAxisd(r).angle(); }

}  // namespace

TEST(BackProject, OpticalAxisPixel) {
  DepthMap d(64, 48);
  d.set(32, 24, 2.0);
  const PointMap m = back_project(d, kK, Pose{});
  EXPECT_TRUE(m.is_valid(32, 24));
  EXPECT_LT((m.values[m.index(32, 24)] - Vec3(0, 0, 2)).norm(), 1e-15);
  EXPECT_FALSE(m.is_valid(0, 0));
}

TEST(BackProject, UnitTangentOffset) {
  const CameraIntrinsics k{10, 10, 5, 5};
  DepthMap d(30, 10);
  d.set(15, 5, 1.0);
  const PointMap m = back_project(d, k, Pose{});
  EXPECT_LT((m.values[m.index(15, 5)] - Vec3(1, 0, 1)).norm(), 1e-15);
}

TEST(BackProject, TranslatedPose) {
  DepthMap d(64, 48);
  d.set(32, 24, 1.0);
  Pose pose;
  pose.translation = Vec3(0, 0, 5);
  const PointMap m = back_project(d, kK, pose);
  EXPECT_LT((m.values[m.index(32, 24)] - Vec3(0, 0, 6)).norm(), 1e-15);
}

TEST(BackProject, ValidityMirrorsDepth) {
  DepthMap d(8, 6);
  d.set(1, 1, 0.0);
  d.set(2, 2, std::nan(""));
  d.set(3, 3, 1.5);
  const PointMap m = back_project(d, CameraIntrinsics{5, 5, 4, 3}, Pose{});
  EXPECT_EQ(m.valid, d.valid);
  EXPECT_EQ(m.valid_count(), 1u);
}

TEST(BackProject, DimensionMismatchIsInputError) {
  DepthMap d(64, 48);
  EXPECT_THROW(back_project(d, CameraIntrinsics{10, 10, 70, 10}, Pose{}), InputError);
}

TEST(BackProject, ProjectInvertsOnValidPixels) {
  Rng rng(3);
  std::uniform_real_distribution<double> depth(0.3, 6.0);
  Pose pose{Eigen::AngleAxisd(0.4, Vec3(0.2, 1, -0.3).normalized()).toRotationMatrix(), Vec3(1, 2, -0.5)};
  DepthMap d(64, 48);
  for (int v = 0; v < 48; v += 3) {
    for (int u = 0; u < 64; u += 5) d.set(u, v, depth(rng));
  }
  const PointMap m = back_project(d, kK, pose);
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) {
      if (!m.is_valid(u, v)) continue;
      const auto px = project(m.values[m.index(u, v)], kK, pose);
      ASSERT_TRUE(px.has_value());
      EXPECT_NEAR(px->u, u, 1e-9);
      EXPECT_NEAR(px->v, v, 1e-9);
      const Vec3 again = pose.apply(unproject_pixel(kK, px->u, px->v, px->depth));
      EXPECT_LT((again - m.values[m.index(u, v)]).norm(), 1e-6);
    }
  }
}

TEST(Aggregate, CountsAndProvenance) {
  PointMap a(4, 1), b(5, 2);
  for (int u = 0; u < 3; ++u) a.valid[a.index(u, 0)] = 1;
  for (int i = 0; i < 5; ++i) b.valid[i * 2] = 1;
  const std::vector<PointMap> maps{a, b};
  const PointCloud c = aggregate_points(maps);
  EXPECT_EQ(c.size(), 8u);
  EXPECT_EQ(c.provenance[0].frame, 0);
  EXPECT_EQ(c.provenance[3].frame, 1);
  EXPECT_EQ(c.provenance[3].u, 0);
  EXPECT_EQ(c.provenance[3].v, 0);
  EXPECT_EQ(c.provenance[4].u, 2);
}

TEST(Aggregate, AllInvalidIsError) {
  const std::vector<PointMap> maps{PointMap(3, 3)};
  EXPECT_THROW(aggregate_points(maps), InputError);
}

TEST(Aggregate, DuplicatesAcrossFramesRetained) {
  DepthMap d(8, 8);
  for (int v = 0; v < 8; ++v) {
    for (int u = 0; u < 8; ++u) d.set(u, v, 1.0);
  }
  const CameraIntrinsics k{8, 8, 4, 4};
  const std::vector<PointMap> maps{back_project(d, k, Pose{}), back_project(d, k, Pose{})};
  const PointCloud c = aggregate_points(maps);
  EXPECT_EQ(c.size(), 128u);
  EXPECT_EQ(c.points[5], c.points[64 + 5]);
}

TEST(AxisAlign, AlignedCloudGivesIdentity) {
  const auto pts = room_cloud();
  const RigidTransform t = estimate_axis_align(pts);
  EXPECT_LT(angle_of(t.rotation), 1e-6);
  EXPECT_LT(t.translation.norm(), 1e-3);
}

TEST(AxisAlign, RecoversYaw) {
  auto pts = room_cloud();
  const Mat3 r = rot_z(30.0 * M_PI / 180);
  for (auto& p : pts) p = r * p + Vec3(3, -1, 0.7);
  const RigidTransform t = estimate_axis_align(pts);
  EXPECT_LT(angle_of(t.rotation * r), 1e-3);
  // Floor lands on z = 0 and the cloud is centred in xy.
  const auto back = room_cloud();
  for (std::size_t i = 0; i < pts.size(); i += 37) {
    EXPECT_NEAR(t.apply(pts[i]).z(), back[i].z(), 1e-6);
  }
}

TEST(AxisAlign, RecoversTiltedFloor) {
  auto pts = room_cloud();
  const Mat3 r = rot_x(10.0 * M_PI / 180);
  for (auto& p : pts) p = r * p;
  const RigidTransform t = estimate_axis_align(pts);
  const Vec3 up = t.rotation * (r * Vec3::UnitZ());
  EXPECT_LT(std::acos(std::clamp(up.z(), -1.0, 1.0)), 1e-2);
}

TEST(AxisAlign, Idempotent) {
  auto pts = room_cloud();
  const Mat3 r = Eigen::AngleAxisd(0.3, Vec3(0.2, 0.1, 1).normalized()).toRotationMatrix();
  for (auto& p : pts) p = r * p + Vec3(-2, 5, 1);
  const RigidTransform t = estimate_axis_align(pts);
  for (auto& p : pts) p = t.apply(p);
  const RigidTransform again = estimate_axis_align(pts);
  EXPECT_LT((again.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT(again.translation.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(AxisAlign, CollinearIsEstimationError) {
  std::vector<Vec3> line;
  for (int i = 0; i < 20; ++i) line.emplace_back(i * 0.1, i * 0.2, 0.0);
  EXPECT_THROW(estimate_axis_align(line), EstimationError);
  EXPECT_THROW(estimate_axis_align(std::vector<Vec3>{Vec3::Zero(), Vec3::Ones()}), EstimationError);
}

TEST(Delaunay, EmptyCircumcircleOnRandomPoints) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec2> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(u(rng), u(rng));
  const Triangulation t = delaunay_2d(pts);
  EXPECT_EQ(t.vertices.size(), pts.size());
  // Euler: a triangulation of n points with h hull vertices has 2n - h - 2 triangles.
  EXPECT_GT(t.triangles.size(), 2 * pts.size() - 2 - 40);
  double area = 0;
  for (const auto& tri : t.triangles) {
    const Vec2 &a = t.vertices[tri[0]], &b = t.vertices[tri[1]], &c = t.vertices[tri[2]];
    const double cross = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    EXPECT_GT(cross, 0);
    area += cross / 2;
    // Circumcenter by solving the perpendicular-bisector system.
    Eigen::Matrix2d m;
    m << 2 * (b - a).x(), 2 * (b - a).y(), 2 * (c - a).x(), 2 * (c - a).y();
    const Vec2 rhs(b.squaredNorm() - a.squaredNorm(), c.squaredNorm() - a.squaredNorm());
    const Vec2 cc = m.colPivHouseholderQr().solve(rhs);
    const double r2 = (a - cc).squaredNorm();
    for (const auto& p : t.vertices) EXPECT_GE((p - cc).squaredNorm(), r2 * (1 - 1e-9));
  }
  // Union of triangles is the convex hull: area below the square's 4.
  EXPECT_LT(area, 4.0);
  EXPECT_GT(area, 3.5);
}

TEST(Delaunay, DuplicatesRemoved) {
  const std::vector<Vec2> pts{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 0)};
  const Triangulation t = delaunay_2d(pts);
  EXPECT_EQ(t.vertices.size(), 3u);
  EXPECT_EQ(t.triangles.size(), 1u);
}

TEST(Delaunay, GridWithCocircularPoints) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) pts.emplace_back(i * 0.05, j * 0.05);
  }
  const Triangulation t = delaunay_2d(pts);
  double area = 0;
  for (const auto& tri : t.triangles) {
    const Vec2 &a = t.vertices[tri[0]], &b = t.vertices[tri[1]], &c = t.vertices[tri[2]];
    area += ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x()) / 2;
  }
  EXPECT_NEAR(area, 0.95 * 0.95, 1e-9);
}

TEST(RoomArea, RightTriangle) {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_NEAR(compute_room_area(pts, 10.0), 0.5, 1e-12);
}

TEST(RoomArea, UnitSquareConvexLimit) {
  std::vector<Vec3> pts;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) pts.emplace_back(i * 0.05, j * 0.05, 0.0);
  }
  EXPECT_NEAR(compute_room_area(pts, 10.0), 1.0, 0.02);
}

TEST(RoomArea, LShapeMatchesShoelace) {
  std::vector<Vec3> pts;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double x = i * 0.05, y = j * 0.05;
      if (x > 1.0 + 1e-9 && y > 1.0 + 1e-9) continue;
      pts.emplace_back(x, y, 0.0);
    }
  }
  const double truth =
      oracle::shoelace({Vec2(0, 0), Vec2(2, 0), Vec2(2, 1), Vec2(1, 1), Vec2(1, 2), Vec2(0, 2)});
  EXPECT_DOUBLE_EQ(truth, 3.0);
  EXPECT_NEAR(compute_room_area(pts, 0.3), truth, 0.1);
}

TEST(RoomArea, InvariantUnderZShiftAndXyRotation) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0, 3), z(0, 2);
  std::vector<Vec3> pts;
  for (int i = 0; i < 2000; ++i) pts.emplace_back(u(rng), u(rng) * 0.7, z(rng));
  const double a0 = compute_room_area(pts, 0.3);
  const Mat3 r = rot_z(0.9);
  std::vector<Vec3> moved;
  for (const auto& p : pts) moved.push_back(r * p + Vec3(0, 0, 4.2));
  EXPECT_NEAR(compute_room_area(moved, 0.3), a0, 1e-6 * a0);
}

TEST(RoomArea, TooFewPointsIsError) {
  EXPECT_THROW(compute_room_area(std::vector<Vec3>{Vec3::Zero(), Vec3::UnitX()}, 1.0), InputError);
}

TEST(BundleIo, RoundTrip) {
  synth::FixtureOptions opt;
  opt.frames = 3;
  opt.image_width = 48;
  opt.image_height = 32;
  opt.focal = 30;
  const SceneBundle b = synth::make_fixture_room(opt, "rt");
  const fs::path dir = temp_dir("bundle_rt");
  write_bundle(b, dir.string());
  const SceneBundle r = read_bundle(dir.string());
  EXPECT_EQ(r.scene_id, "rt");
  ASSERT_EQ(r.frames.size(), 3u);
  EXPECT_EQ(r.objects.size(), b.objects.size());
  for (std::size_t i = 0; i < b.objects.size(); ++i) {
    EXPECT_EQ(r.objects[i].id, b.objects[i].id);
    EXPECT_EQ(r.objects[i].category, b.objects[i].category);
    EXPECT_LT((r.objects[i].box.min - b.objects[i].box.min).norm(), 1e-12);
  }
  EXPECT_EQ(r.frames[1].depth.valid, b.frames[1].depth.valid);
  for (std::size_t k = 0; k < b.frames[1].depth.size(); ++k) {
    EXPECT_NEAR(r.frames[1].depth.values[k], b.frames[1].depth.values[k], 1e-9);
  }
  EXPECT_LT((r.frames[2].pose.rotation - b.frames[2].pose.rotation).norm(), 1e-12);
  EXPECT_EQ(r.frames[0].image.data, b.frames[0].image.data);
  ASSERT_TRUE(r.frames[0].mask.has_value());
  EXPECT_EQ(r.frames[0].mask->ids, b.frames[0].mask->ids);
  EXPECT_EQ(r.trajectories.size(), b.trajectories.size());
  EXPECT_TRUE(r.axis_align_applied);
  fs::remove_all(dir);
}

TEST(BundleIo, TruncatedDepthNamesFileAndOffset) {
  synth::FixtureOptions opt;
  opt.frames = 1;
  opt.image_width = 32;
  opt.image_height = 16;
  opt.focal = 20;
  const fs::path dir = temp_dir("bundle_trunc");
  write_bundle(synth::make_fixture_room(opt), dir.string());
  const fs::path depth = dir / "depth" / "0000.pgm";
  fs::resize_file(depth, fs::file_size(depth) - 10);
  try {
    read_bundle(dir.string());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(fs::path(e.file()), depth);
    EXPECT_NE(std::string(e.what()).find("0000.pgm"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(BundleIo, NonOrthonormalPoseIsInvariantError) {
  const fs::path dir = temp_dir("pose");
  {
    std::ofstream out(dir / "p.txt");
    out << "1 0 0 0\n0 1.01 0 0\n0 0 1 0\n0 0 0 1\n";
  }
  EXPECT_THROW(read_pose((dir / "p.txt").string()), InvariantError);
  {
    std::ofstream out(dir / "q.txt");
    out << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 1 1\n";
  }
  EXPECT_THROW(read_pose((dir / "q.txt").string()), InvariantError);
  {
    std::ofstream out(dir / "r.txt");
    out << "1 0 0 0\n0 1 0 0\n0 0 1 zero\n0 0 0 1\n";
  }
  try {
    read_pose((dir / "r.txt").string());
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 22u);
  }
  fs::remove_all(dir);
}

TEST(BundleIo, DuplicateObjectIdIsInvariantError) {
  const fs::path dir = temp_dir("objects");
  {
    std::ofstream out(dir / "objects.json");
    out << R"({"scene_id": "s", "objects": [
      {"id": 1, "category": "chair", "min": [0,0,0], "max": [1,1,1]},
      {"id": 1, "category": "table", "min": [0,0,0], "max": [1,1,1]}]})";
  }
  SceneBundle b;
  EXPECT_THROW(read_objects((dir / "objects.json").string(), b), InvariantError);
  fs::remove_all(dir);
}
