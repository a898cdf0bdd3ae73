#include <gsr/core/random.hpp>
#include <gsr/patch/dual_path.hpp>
#include <gsr/patch/fuse.hpp>
#include <gsr/patch/geo_map.hpp>
#include <gsr/patch/morton.hpp>
#include <gsr/patch/patch_grid.hpp>
#include <gsr/patch/point_set.hpp>
#include <gsr/patch/positional.hpp>

#include "support/jvp.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace gsr;

namespace {

PointMap full_map(int w, int h) {
  PointMap m(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      m.values[m.index(u, v)] = Vec3(u, v, 1.0);
      m.valid[m.index(u, v)] = 1;
    }
  }
  return m;
}

Matrix random_matrix(Rng& rng, int r, int c) {
  std::normal_distribution<double> n(0, 1);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) m(i, j) = n(rng);
  }
  return m;
}

RowVector random_row(Rng& rng, int c) { return random_matrix(rng, 1, c).row(0); }

// Reference interleave one bit at a time: x at 3b, y at 3b+1, z at 3b+2.
std::uint64_t naive_morton(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  std::uint64_t code = 0;
  for (int b = 0; b < 21; ++b) {
    code |= std::uint64_t((x >> b) & 1) << (3 * b);
    code |= std::uint64_t((y >> b) & 1) << (3 * b + 1);
    code |= std::uint64_t((z >> b) & 1) << (3 * b + 2);
  }
  return code;
}

}  // namespace

TEST(PartitionAndSample, GridDimensions) {
  const PatchGrid g = partition_and_sample(full_map(32, 32), 16, 4, 1);
  EXPECT_EQ(g.rows, 2);
  EXPECT_EQ(g.cols, 2);
  ASSERT_EQ(g.patch_count(), 4u);
  for (const auto& p : g.patches) {
    EXPECT_EQ(p.points.size(), 4u);
    EXPECT_EQ(p.pad_count, 0);
    EXPECT_TRUE(p.valid);
    EXPECT_EQ(std::set<int>(p.pixels.begin(), p.pixels.end()).size(), 4u);
  }
}

TEST(PartitionAndSample, RemainderDropped) {
  const PatchGrid g = partition_and_sample(full_map(37, 20), 16, 4, 1);
  EXPECT_EQ(g.rows, 1);
  EXPECT_EQ(g.cols, 2);
  EXPECT_EQ(g.dropped_right, 5);
  EXPECT_EQ(g.dropped_bottom, 4);
}

TEST(PartitionAndSample, SamplesInsideFootprint) {
  const PointMap m = full_map(48, 32);
  const PatchGrid g = partition_and_sample(m, 16, 64, 9);
  for (int h = 0; h < g.rows; ++h) {
    for (int w = 0; w < g.cols; ++w) {
      for (int px : g.at(h, w).pixels) {
        const int u = px % m.width, v = px / m.width;
        EXPECT_GE(u, w * 16);
        EXPECT_LT(u, (w + 1) * 16);
        EXPECT_GE(v, h * 16);
        EXPECT_LT(v, (h + 1) * 16);
      }
    }
  }
}

TEST(PartitionAndSample, PaddingWithReplacement) {
  PointMap m(16, 16);
  m.valid[m.index(3, 4)] = 1;
  m.values[m.index(3, 4)] = Vec3(1, 2, 3);
  m.valid[m.index(10, 12)] = 1;
  m.values[m.index(10, 12)] = Vec3(4, 5, 6);
  const PatchGrid g = partition_and_sample(m, 16, 4, 2);
  const auto& p = g.at(0, 0);
  EXPECT_EQ(p.valid_pixels, 2);
  EXPECT_EQ(p.pad_count, 2);
  EXPECT_EQ(std::set<int>(p.pixels.begin(), p.pixels.end()),
            (std::set<int>{int(m.index(3, 4)), int(m.index(10, 12))}));
  // Center pixel (8, 8) is invalid: nearest valid is (10, 12) at d^2 = 20 vs (3, 4) at 41.
  EXPECT_EQ(p.center_pixel, int(m.index(10, 12)));
  EXPECT_EQ(p.center, Vec3(4, 5, 6));
}

TEST(PartitionAndSample, CenterPixelWhenValid) {
  const PointMap m = full_map(32, 16);
  const PatchGrid g = partition_and_sample(m, 16, 4, 2);
  EXPECT_EQ(g.at(0, 1).center, Vec3(24, 8, 1));
}

TEST(PartitionAndSample, EmptyPatchInvalid) {
  PointMap m = full_map(32, 16);
  for (int v = 0; v < 16; ++v) {
    for (int u = 16; u < 32; ++u) m.valid[m.index(u, v)] = 0;
  }
  const PatchGrid g = partition_and_sample(m, 16, 8, 2);
  EXPECT_TRUE(g.at(0, 0).valid);
  EXPECT_FALSE(g.at(0, 1).valid);
  EXPECT_EQ(g.at(0, 1).pad_count, 8);
  EXPECT_EQ(g.at(0, 1).center_pixel, -1);
}

TEST(PartitionAndSample, DeterministicPerSeed) {
  const PointMap m = full_map(64, 32);
  const PatchGrid a = partition_and_sample(m, 16, 16, 42);
  const PatchGrid b = partition_and_sample(m, 16, 16, 42);
  const PatchGrid c = partition_and_sample(m, 16, 16, 43);
  bool differs = false;
  for (std::size_t i = 0; i < a.patch_count(); ++i) {
    EXPECT_EQ(a.patches[i].pixels, b.patches[i].pixels);
    differs |= a.patches[i].pixels != c.patches[i].pixels;
  }
  EXPECT_TRUE(differs);
}

TEST(PartitionAndSample, SmallerThanPatchIsError) {
  EXPECT_THROW(partition_and_sample(full_map(8, 8), 16, 4, 0), InputError);
}

TEST(Morton, SpecExample) {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(0, 0, 1)};
  const auto codes = morton_codes(pts, 1.0);
  EXPECT_EQ(codes, (std::vector<std::uint64_t>{0, 7, 4}));
  EXPECT_EQ(morton_serialize(pts, 1.0), (std::vector<std::size_t>{0, 2, 1}));
}

TEST(Morton, MatchesBitwiseReference) {
  Rng rng(1);
  std::uniform_int_distribution<std::uint32_t> d(0, kMortonAxisLimit - 1);
  for (int i = 0; i < 2000; ++i) {
    const auto x = d(rng), y = d(rng), z = d(rng);
    ASSERT_EQ(morton_code(x, y, z), naive_morton(x, y, z));
  }
}

TEST(Morton, SingleAndIdentical) {
  EXPECT_EQ(morton_serialize(std::vector<Vec3>{Vec3(5, 5, 5)}, 0.1), (std::vector<std::size_t>{0}));
  const std::vector<Vec3> same(5, Vec3(1, 2, 3));
  EXPECT_EQ(morton_serialize(same, 0.1), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Morton, OffsetToNonNegative) {
  const std::vector<Vec3> pts{Vec3(-5, -5, -5), Vec3(-4, -5, -5)};
  EXPECT_EQ(morton_codes(pts, 1.0), (std::vector<std::uint64_t>{0, 1}));
}

TEST(Morton, RangeAndVoxelErrors) {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(3e6, 0, 0)};
  EXPECT_THROW(morton_codes(pts, 1.0), RangeError);
  EXPECT_NO_THROW(morton_codes(pts, 2.0));
  EXPECT_THROW(morton_codes(pts, 0.0), InputError);
}

TEST(PoolSubset, MaxAndMean) {
  PointSet s{{Vec3(0, 0, 0), Vec3(2, 0, 0)}, Matrix(2, 2)};
  s.features << 1, 3, 2, 2;
  const PooledPoint p = pool_subset(s, Matrix::Identity(2, 2));
  EXPECT_EQ(p.feature, RowVector((RowVector(2) << 2, 3).finished()));
  EXPECT_EQ(p.position, Vec3(1, 0, 0));
}

TEST(PoolSubset, SingleElementIsProjection) {
  Rng rng(2);
  PointSet s{{Vec3(1, 2, 3)}, random_matrix(rng, 1, 4)};
  const Matrix u = random_matrix(rng, 4, 3);
  const PooledPoint p = pool_subset(s, u);
  EXPECT_LT((p.feature - s.features.row(0) * u).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(p.position, Vec3(1, 2, 3));
}

TEST(PoolSubset, DominatesEveryMember) {
  Rng rng(3);
  PointSet s{std::vector<Vec3>(9, Vec3::Zero()), random_matrix(rng, 9, 5)};
  const Matrix u = random_matrix(rng, 5, 7);
  const PooledPoint p = pool_subset(s, u);
  for (int j = 0; j < 9; ++j) {
    const RowVector f = s.features.row(j) * u;
    for (int c = 0; c < 7; ++c) EXPECT_GE(p.feature(c), f(c));
  }
}

TEST(PoolSubset, EmptyAndMismatchedAreErrors) {
  PointSet empty{{}, Matrix(0, 2)};
  EXPECT_THROW(pool_subset(empty, Matrix::Identity(2, 2)), InputError);
  PointSet s{{Vec3::Zero()}, Matrix::Ones(1, 3)};
  EXPECT_THROW(pool_subset(s, Matrix::Identity(2, 2)), InputError);
}

TEST(Unpool, BroadcastOneSubset) {
  Rng rng(4);
  const Matrix fine = random_matrix(rng, 4, 2);
  const Matrix coarse = random_matrix(rng, 1, 3);
  const std::vector<int> map{0, 0, 0, 0};
  const Matrix out = unpool(fine, coarse, map);
  ASSERT_EQ(out.cols(), 5);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(out.row(i).head(2), fine.row(i));
    EXPECT_EQ(out.row(i).tail(3), coarse.row(0));
  }
}

TEST(Unpool, TwoSubsetsAndPermutation) {
  Rng rng(5);
  const Matrix fine = random_matrix(rng, 6, 2);
  const Matrix coarse = random_matrix(rng, 2, 3);
  const std::vector<int> map{0, 1, 1, 0, 1, 0};
  const Matrix out = unpool(fine, coarse, map);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      EXPECT_EQ(out.row(i).tail(3) == out.row(j).tail(3), map[i] == map[j]);
    }
  }
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  Matrix pf(6, 2);
  std::vector<int> pm(6);
  for (int i = 0; i < 6; ++i) {
    pf.row(i) = fine.row(perm[i]);
    pm[i] = map[perm[i]];
  }
  const Matrix pout = unpool(pf, coarse, pm);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(pout.row(i), out.row(perm[i]));
}

TEST(Unpool, UnmappedIsError) {
  const Matrix fine = Matrix::Zero(3, 2), coarse = Matrix::Zero(2, 2);
  EXPECT_THROW(unpool(fine, coarse, std::vector<int>{0, 1}), InputError);
  EXPECT_THROW(unpool(fine, coarse, std::vector<int>{0, -1, 1}), InputError);
  EXPECT_THROW(unpool(fine, coarse, std::vector<int>{0, 2, 1}), InputError);
}

TEST(ScatterToMap, RoundTripAndCoverage) {
  PointMap a = full_map(32, 16), b = full_map(32, 16);
  for (int v = 0; v < 16; ++v) {
    for (int u = 0; u < 16; ++u) b.valid[b.index(u, v)] = 0;
  }
  const std::vector<PatchGrid> grids{partition_and_sample(a, 16, 3, 1, 0), partition_and_sample(b, 16, 3, 1, 1)};
  const auto slots = sample_slots(grids);
  EXPECT_EQ(slots.size(), 9u);
  Matrix feats(9, 2);
  for (int i = 0; i < 9; ++i) feats.row(i) << i + 1, -(i + 1);
  const GeoFeatureMap map = scatter_to_map(feats, slots, grids);
  EXPECT_EQ(flatten_map(map, slots), feats);
  // Every written slot holds a distinct non-zero value; unwritten patch stays zero and invalid.
  std::set<double> seen;
  for (int f = 0; f < 2; ++f) {
    for (int w = 0; w < 2; ++w) {
      for (int k = 0; k < 3; ++k) {
        const double v = map.at(f, 0, k, 0, w);
        if (map.patch_valid(f, 0, w)) {
          EXPECT_TRUE(seen.insert(v).second);
          EXPECT_NE(v, 0.0);
        } else {
          EXPECT_EQ(v, 0.0);
        }
      }
    }
  }
  EXPECT_EQ(seen.size(), 9u);
  EXPECT_FALSE(map.patch_valid(1, 0, 0));
  // Frame 1 receives exactly the rows whose provenance names frame 1.
  for (std::size_t i = 0; i < slots.size(); ++i) {
    EXPECT_EQ(map.at(slots[i].frame, 0, slots[i].k, slots[i].h, slots[i].w), double(i + 1));
  }
}

TEST(ScatterToMap, Errors) {
  const std::vector<PatchGrid> grids{partition_and_sample(full_map(16, 16), 16, 2, 1)};
  auto slots = sample_slots(grids);
  EXPECT_THROW(scatter_to_map(Matrix::Zero(3, 1), slots, grids), InputError);
  auto dup = slots;
  dup[1] = dup[0];
  EXPECT_THROW(scatter_to_map(Matrix::Zero(2, 1), dup, grids), InputError);
  auto out_of_range = slots;
  out_of_range[1].k = 5;
  EXPECT_THROW(scatter_to_map(Matrix::Zero(2, 1), out_of_range, grids), InputError);
  slots.pop_back();
  EXPECT_THROW(scatter_to_map(Matrix::Zero(1, 1), slots, grids), InputError);
}

namespace {

SemanticPoolWeights random_pool_weights(Rng& rng, int ds, int c, int d, int cout) {
  return {random_matrix(rng, ds, d), random_matrix(rng, c, d), random_matrix(rng, c, cout)};
}

}  // namespace

TEST(SemanticAlignedPool, IdenticalRowsIgnoreQuery) {
  Rng rng(6);
  const auto w = random_pool_weights(rng, 5, 4, 3, 6);
  const RowVector g = random_row(rng, 4);
  const Matrix geo = g.replicate(7, 1);
  const auto r = semantic_aligned_pool(random_row(rng, 5), geo, w);
  EXPECT_TRUE(r.feature == RowVector(g * w.value));
  EXPECT_NEAR(r.attention.sum(), 1.0, 1e-12);
}

TEST(SemanticAlignedPool, SingleSample) {
  Rng rng(7);
  const auto w = random_pool_weights(rng, 5, 4, 3, 6);
  const Matrix geo = random_matrix(rng, 1, 4);
  const auto r = semantic_aligned_pool(random_row(rng, 5), geo, w);
  EXPECT_LT((r.feature - geo.row(0) * w.value).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SemanticAlignedPool, SaturatedLogitSelectsValue) {
  // Identity projections with d = 1: logit_j = q g_j. Row 2 sits +50 above the rest.
  SemanticPoolWeights w{Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  Matrix geo(4, 1);
  geo << 0.1, 0.2, 50.3, 0.0;
  RowVector q(1);
  q << 1.0;
  const auto r = semantic_aligned_pool(q, geo, w);
  // Direct evaluation: weights exp(l_j - l_max) / sum.
  double z = 0, num = 0;
  for (int j = 0; j < 4; ++j) {
    z += std::exp(geo(j, 0) - 50.3);
    num += std::exp(geo(j, 0) - 50.3) * geo(j, 0);
  }
  EXPECT_NEAR(r.feature(0), num / z, 1e-12);
  EXPECT_NEAR(r.feature(0), 50.3, 1e-12);
  EXPECT_NEAR(r.attention(2), 1.0, 1e-15);
}

TEST(SemanticAlignedPool, OutputInConvexHullOfValues) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_pool_weights(rng, 6, 5, 4, 3);
    const Matrix geo = random_matrix(rng, 10, 5);
    const auto r = semantic_aligned_pool(random_row(rng, 6), geo, w);
    const Matrix v = geo * w.value;
    EXPECT_NEAR(r.attention.sum(), 1.0, 1e-12);
    EXPECT_GE(r.attention.minCoeff(), 0.0);
    EXPECT_LT((r.feature - r.attention.transpose() * v).cwiseAbs().maxCoeff(), 1e-12);
    for (int c = 0; c < 3; ++c) {
      EXPECT_LE(r.feature(c), v.col(c).maxCoeff() + 1e-12);
      EXPECT_GE(r.feature(c), v.col(c).minCoeff() - 1e-12);
    }
  }
}

TEST(SemanticAlignedPool, DimensionErrors) {
  Rng rng(9);
  const auto w = random_pool_weights(rng, 5, 4, 3, 6);
  EXPECT_THROW(semantic_aligned_pool(random_row(rng, 4), random_matrix(rng, 3, 4), w), InputError);
  EXPECT_THROW(semantic_aligned_pool(random_row(rng, 5), random_matrix(rng, 3, 3), w), InputError);
  EXPECT_THROW(semantic_aligned_pool(random_row(rng, 5), Matrix(0, 4), w), InputError);
}

TEST(SemanticAlignedPool, JvpMatchesCentralDifference) {
  Rng rng(10);
  const auto w = random_pool_weights(rng, 6, 5, 4, 3);
  const RowVector s = random_row(rng, 6), ds = random_row(rng, 6);
  const Matrix g = random_matrix(rng, 8, 5), dg = random_matrix(rng, 8, 5);
  const RowVector analytic = jvp::semantic_pool_jvp(s, g, ds, dg, w);
  const Eigen::VectorXd numeric = oracle::central_difference(
      [&](double t) -> Eigen::VectorXd {
        return semantic_aligned_pool(s + t * ds, g + t * dg, w).feature.transpose();
      },
      1e-5);
  EXPECT_LT((analytic.transpose() - numeric).norm(), 1e-4 * std::max(1.0, numeric.norm()));
}

TEST(PositionAlignedSample, CoincidentCenterIsExact) {
  Rng rng(11);
  const std::vector<Vec3> samples{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.3, 0.7, 0.1), Vec3(0, 2, 0)};
  const Matrix geo = random_matrix(rng, 4, 5);
  EXPECT_EQ(position_aligned_sample(samples[2], samples, geo), RowVector(geo.row(2)));
}

TEST(PositionAlignedSample, EquidistantPairIsMean) {
  const std::vector<Vec3> samples{Vec3(-1, 0, 0), Vec3(1, 0, 0)};
  Matrix geo(2, 2);
  geo << 1, 4, 3, 8;
  const RowVector r = position_aligned_sample(Vec3::Zero(), samples, geo);
  EXPECT_NEAR(r(0), 2.0, 1e-12);
  EXPECT_NEAR(r(1), 6.0, 1e-12);
}

TEST(PositionAlignedSample, HandComputedWeights) {
  const std::vector<Vec3> samples{Vec3(1, 0, 0), Vec3(0, 2, 0)};
  Matrix geo(2, 1);
  geo << 3, 9;
  const double w1 = 1 / (1 + 1e-8), w2 = 1 / (2 + 1e-8);
  EXPECT_NEAR(position_aligned_sample(Vec3::Zero(), samples, geo)(0), (3 * w1 + 9 * w2) / (w1 + w2), 1e-12);
  EXPECT_NEAR(position_aligned_sample(Vec3::Zero(), samples, geo)(0), 3 * 2.0 / 3 + 9 * 1.0 / 3, 1e-7);
}

TEST(PositionAlignedSample, UsesThreeNearest) {
  const std::vector<Vec3> samples{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(10, 0, 0)};
  Matrix geo(4, 1);
  geo << 1, 1, 1, 1000;
  EXPECT_NEAR(position_aligned_sample(Vec3::Zero(), samples, geo)(0), 1.0, 1e-12);
}

TEST(PositionAlignedSample, ContinuousAwayFromSwitches) {
  Rng rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> samples;
  for (int i = 0; i < 16; ++i) samples.emplace_back(u(rng), u(rng), u(rng));
  const Matrix geo = random_matrix(rng, 16, 4);
  const Vec3 c(0.05, -0.02, 0.11);
  const RowVector base = position_aligned_sample(c, samples, geo);
  for (int a = 0; a < 3; ++a) {
    const RowVector moved = position_aligned_sample(c + 1e-6 * Vec3::Unit(a), samples, geo);
    EXPECT_LT((moved - base).norm(), 1e-6 * 1e3);
  }
}

TEST(PositionAlignedSample, Errors) {
  EXPECT_THROW(position_aligned_sample(Vec3::Zero(), std::vector<Vec3>{}, Matrix(0, 2)), InputError);
  EXPECT_THROW(position_aligned_sample(Vec3::Zero(), std::vector<Vec3>{Vec3::Zero()}, Matrix(2, 2)), InputError);
}

TEST(PositionalEncode, AtMinimum) {
  const Aabb box{Vec3(-1, 0, 2), Vec3(3, 5, 4)};
  const RowVector pe = positional_encode(box.min, box, 24);
  for (int i = 0; i < 24; i += 2) {
    EXPECT_NEAR(pe(i), 0.0, 1e-15);
    EXPECT_NEAR(pe(i + 1), 1.0, 1e-15);
  }
}

TEST(PositionalEncode, MidpointD6) {
  const Aabb box{Vec3(0, 0, 0), Vec3(2, 4, 6)};
  const RowVector pe = positional_encode(box.center(), box, 6);
  for (int a = 0; a < 3; ++a) {
    EXPECT_NEAR(pe(2 * a), 1.0, 1e-15);
    EXPECT_NEAR(pe(2 * a + 1), 0.0, 1e-15);
  }
}

TEST(PositionalEncode, DegenerateAxisEncodesZero) {
  const Aabb flat{Vec3(0, 0, 1), Vec3(1, 1, 1)};
  const RowVector pe = positional_encode(Vec3(0.5, 0.5, 7), flat, 12);
  EXPECT_NEAR(pe(8), 0.0, 1e-15);
  EXPECT_NEAR(pe(9), 1.0, 1e-15);
  EXPECT_THROW(positional_encode(Vec3::Zero(), flat, 10), InputError);
}

TEST(PositionalEncode, InjectiveOnGrid) {
  const Aabb box{Vec3(0, 0, 0), Vec3(1, 1, 1)};
  std::vector<RowVector> codes;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k) codes.push_back(positional_encode(Vec3(i, j, k) / 8.0, box, 24));
    }
  }
  double min_gap = 1e9;
  for (std::size_t a = 0; a < codes.size(); ++a) {
    for (std::size_t b = a + 1; b < codes.size(); ++b) min_gap = std::min(min_gap, (codes[a] - codes[b]).norm());
  }
  EXPECT_GT(min_gap, 1e-3);
}

TEST(Fuse, SemanticOnly) {
  Rng rng(13);
  const FuseWeights w{random_matrix(rng, 5, 12), random_matrix(rng, 7, 12)};
  const RowVector s = random_row(rng, 5);
  const auto f = fuse(s, RowVector::Zero(3), RowVector::Zero(4), RowVector::Zero(12), w);
  EXPECT_LT((f.hybrid - s * w.semantic).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(f.hybrid.size(), 12);
  EXPECT_EQ(f.geometric_term.size(), 12);
}

TEST(Fuse, ZeroWeights) {
  Rng rng(14);
  const FuseWeights w{Matrix::Zero(5, 6), Matrix::Zero(7, 6)};
  const auto f = fuse(random_row(rng, 5), random_row(rng, 3), random_row(rng, 4), RowVector::Zero(6), w);
  EXPECT_EQ(f.hybrid, RowVector::Zero(6));
}

TEST(Fuse, LinearInGeometricInput) {
  Rng rng(15);
  const FuseWeights w{random_matrix(rng, 5, 12), random_matrix(rng, 7, 12)};
  const RowVector s = random_row(rng, 5), pe = random_row(rng, 12);
  const RowVector g1s = random_row(rng, 3), g1p = random_row(rng, 4), g2s = random_row(rng, 3), g2p = random_row(rng, 4);
  const RowVector delta = fuse(s, g1s + g2s, g1p + g2p, pe, w).hybrid - fuse(s, g1s, g1p, pe, w).hybrid;
  RowVector g2(7);
  g2 << g2s, g2p;
  EXPECT_LT((delta - g2 * w.geometric).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fuse, ConstituentsSumToHybrid) {
  Rng rng(16);
  const FuseWeights w{random_matrix(rng, 5, 12), random_matrix(rng, 7, 12)};
  const auto f = fuse(random_row(rng, 5), random_row(rng, 3), random_row(rng, 4), random_row(rng, 12), w);
  EXPECT_LT((f.semantic_term + f.positional + f.geometric_term - f.hybrid).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Fuse, DimensionErrors) {
  Rng rng(17);
  const FuseWeights w{random_matrix(rng, 5, 12), random_matrix(rng, 7, 12)};
  EXPECT_THROW(fuse(random_row(rng, 4), random_row(rng, 3), random_row(rng, 4), random_row(rng, 12), w), InputError);
  EXPECT_THROW(fuse(random_row(rng, 5), random_row(rng, 3), random_row(rng, 3), random_row(rng, 12), w), InputError);
  EXPECT_THROW(fuse(random_row(rng, 5), random_row(rng, 3), random_row(rng, 4), random_row(rng, 6), w), InputError);
}

TEST(Fuse, JvpMatchesCentralDifference) {
  Rng rng(18);
  const FuseWeights w{random_matrix(rng, 5, 12), random_matrix(rng, 7, 12)};
  const RowVector s = random_row(rng, 5), gs = random_row(rng, 3), gp = random_row(rng, 4), pe = random_row(rng, 12);
  const RowVector ds = random_row(rng, 5), dgs = random_row(rng, 3), dgp = random_row(rng, 4), dpe = random_row(rng, 12);
  const RowVector analytic = jvp::fuse_jvp(ds, dgs, dgp, dpe, w);
  const Eigen::VectorXd numeric = oracle::central_difference(
      [&](double t) -> Eigen::VectorXd {
        return fuse(s + t * ds, gs + t * dgs, gp + t * dgp, pe + t * dpe, w).hybrid.transpose();
      },
      1e-5);
  EXPECT_LT((analytic.transpose() - numeric).norm(), 1e-4 * std::max(1.0, numeric.norm()));
}
