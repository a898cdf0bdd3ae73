#include <gsr/core/error.hpp>
#include <gsr/core/netpbm.hpp>
#include <gsr/core/random.hpp>
#include <gsr/core/types.hpp>

#include <gtest/gtest.h>

#include <Eigen/Geometry>

using namespace gsr;

TEST(Aabb, FromCornersOrdersMinMax) {
  const Aabb b = Aabb::from_corners(Vec3(1, -2, 3), Vec3(-1, 2, 0));
  EXPECT_EQ(b.min, Vec3(-1, -2, 0));
  EXPECT_EQ(b.max, Vec3(1, 2, 3));
  EXPECT_TRUE(b.valid());
  EXPECT_DOUBLE_EQ(b.volume(), 2 * 4 * 3);
  EXPECT_DOUBLE_EQ(b.diagonal(), std::sqrt(4 + 16 + 9.0));
}

TEST(Aabb, DistanceToIsZeroInsideAndEuclideanOutside) {
  const Aabb b{Vec3(0, 0, 0), Vec3(1, 1, 1)};
  EXPECT_DOUBLE_EQ(b.distance_to(Vec3(0.5, 0.5, 0.5)), 0.0);
  EXPECT_DOUBLE_EQ(b.distance_to(Vec3(2, 0.5, 0.5)), 1.0);
  EXPECT_DOUBLE_EQ(b.distance_to(Vec3(4, 5, 0.5)), 5.0);
}

TEST(RigidTransform, InverseAndCompose) {
  RigidTransform t{Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix(), Vec3(1, -2, 0.5)};
  const Vec3 p(0.3, 0.4, -2);
  EXPECT_LT((t.inverse().apply(t.apply(p)) - p).norm(), 1e-12);
  const RigidTransform id = t.compose(t.inverse());
  EXPECT_LT((id.rotation - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT(id.translation.norm(), 1e-12);
  EXPECT_TRUE(is_rotation(t.rotation));
  Mat3 bad = t.rotation;
  bad(0, 0) += 1e-3;
  EXPECT_FALSE(is_rotation(bad));
  EXPECT_FALSE(is_rotation(-Mat3::Identity()));
}

TEST(Random, DerivedSeedsDifferPerPart) {
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_EQ(derive_seed(9, 4, 5), derive_seed(9, 4, 5));
}

TEST(Netpbm, SixteenBitRoundTrip) {
  netpbm::Image img{3, 2, 1, 65535, {0, 1, 256, 65535, 1000, 7}};
  const auto bytes = netpbm::encode(img);
  const auto back = netpbm::decode("mem.pgm", bytes);
  EXPECT_EQ(back.width, 3);
  EXPECT_EQ(back.height, 2);
  EXPECT_EQ(back.samples, img.samples);
  // Big-endian sample order.
  const std::size_t header = bytes.size() - 12;
  EXPECT_EQ(bytes[header + 4], 0x01);
  EXPECT_EQ(bytes[header + 5], 0x00);
}

TEST(Netpbm, CommentsInHeader) {
  const std::string text = "P5\n# made by hand\n2 1\n255\n\x05\x06";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  const auto img = netpbm::decode("c.pgm", bytes);
  EXPECT_EQ(img.samples, (std::vector<std::uint16_t>{5, 6}));
}

TEST(Netpbm, TruncatedRasterReportsOffset) {
  netpbm::Image img{4, 4, 1, 65535, std::vector<std::uint16_t>(16, 9)};
  auto bytes = netpbm::encode(img);
  bytes.resize(bytes.size() - 5);
  try {
    netpbm::decode("t.pgm", bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.file(), "t.pgm");
    EXPECT_GT(e.offset(), 0u);
    EXPECT_LE(e.offset(), bytes.size());
  }
}

TEST(Netpbm, BadMagic) {
  const std::string text = "P2\n1 1\n255\n0";
  EXPECT_THROW(netpbm::decode("m.pgm", {text.begin(), text.end()}), FormatError);
}
