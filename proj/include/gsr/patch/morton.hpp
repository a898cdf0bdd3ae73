#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace gsr {

inline constexpr int kMortonBitsPerAxis = 21;
inline constexpr std::uint32_t kMortonAxisLimit = 1u << kMortonBitsPerAxis;

namespace detail {

constexpr std::uint64_t spread_bits3(std::uint32_t v) {
  std::uint64_t x = v & 0x1fffff;
  x = (x | (x << 32)) & 0x1f00000000ffffULL;
  x = (x | (x << 16)) & 0x1f0000ff0000ffULL;
  x = (x | (x << 8)) & 0x100f00f00f00f00fULL;
  x = (x | (x << 4)) & 0x10c30c30c30c30c3ULL;
  x = (x | (x << 2)) & 0x1249249249249249ULL;
  return x;
}

}  // namespace detail

// Interleaves three 21-bit cell indices. Within each 3-bit group x occupies
// the lowest bit, then y, then z.
constexpr std::uint64_t morton_code(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  return detail::spread_bits3(x) | (detail::spread_bits3(y) << 1) | (detail::spread_bits3(z) << 2);
}

// Quantizes points to a voxel grid anchored at their componentwise minimum
// and returns one Morton code per point.
inline std::vector<std::uint64_t> morton_codes(std::span<const Vec3> points, double voxel) {
  if (!(voxel > 0)) throw InputError("morton: voxel size must be positive");
  std::vector<std::uint64_t> codes(points.size());
  if (points.empty()) return codes;
  Vec3 lo = points[0];
  for (const auto& p : points) {
    if (!p.allFinite()) throw RangeError("morton: non-finite coordinate");
    lo = lo.cwiseMin(p);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::uint32_t q[3];
    for (int a = 0; a < 3; ++a) {
      const double cell = std::floor((points[i][a] - lo[a]) / voxel);
      if (!(cell < kMortonAxisLimit)) {
        throw RangeError("morton: quantized coordinate exceeds 21 bits (extent too large for voxel size)");
      }
      q[a] = static_cast<std::uint32_t>(cell);
    }
    codes[i] = morton_code(q[0], q[1], q[2]);
  }
  return codes;
}

// Permutation ordering the points along the Morton curve; equal codes keep
// their input order.
inline std::vector<std::size_t> morton_serialize(std::span<const Vec3> points, double voxel) {
  const auto codes = morton_codes(points, voxel);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return codes[a] < codes[b]; });
  return order;
}

}  // namespace gsr
