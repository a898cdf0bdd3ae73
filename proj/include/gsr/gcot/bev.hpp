#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/netpbm.hpp>
#include <gsr/core/types.hpp>
#include <gsr/scene/bundle.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gsr {

using Color = std::array<std::uint8_t, 3>;

struct BevBox {
  Aabb box;
  std::string category;
};

// Top-down raster. Pixel (col, row) covers x in [origin.x + col*mpp, +mpp)
// and y in (origin.y - (row+1)*mpp, origin.y - row*mpp]; rows grow towards -y.
struct BevImage {
  int width = 0;
  int height = 0;
  double mpp = 0;
  Vec2 origin = Vec2::Zero();  // world xy of the top-left corner
  RgbImage image;
  std::map<std::string, Color> color_key;

  int col(double x) const { return static_cast<int>(std::floor((x - origin.x()) / mpp)); }
  int row(double y) const { return static_cast<int>(std::floor((origin.y() - y) / mpp)); }
};

inline constexpr int kBevMargin = 2;  // pixels
inline constexpr int kBevStroke = 2;  // pixels

inline Color hsv_color(double h, double s, double v) {
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto q = [&](double t) { return static_cast<std::uint8_t>(std::lround((t + m) * 255.0)); };
  return {q(r), q(g), q(b)};
}

// One color per category; categories are ordered by name and spaced by the
// golden ratio in hue.
inline std::map<std::string, Color> category_colors(std::vector<std::string> categories) {
  std::sort(categories.begin(), categories.end());
  categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
  std::map<std::string, Color> key;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const double h = std::fmod(0.618033988749895 * static_cast<double>(i), 1.0);
    key[categories[i]] = hsv_color(h, 0.85, 0.95);
  }
  return key;
}

inline BevImage render_bev(std::span<const Vec3> points, std::span<const BevBox> boxes, double mpp) {
  if (!(mpp > 0) || !std::isfinite(mpp)) throw InputError("render_bev: meters per pixel must be positive");
  if (points.empty() && boxes.empty()) throw InputError("render_bev: empty scene");

  Vec2 lo(INFINITY, INFINITY), hi(-INFINITY, -INFINITY);
  double zlo = INFINITY, zhi = -INFINITY;
  for (const auto& p : points) {
    if (!p.allFinite()) throw InputError("render_bev: non-finite point");
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
    zlo = std::min(zlo, p.z());
    zhi = std::max(zhi, p.z());
  }
  for (const auto& b : boxes) {
    if (!b.box.valid()) throw InputError("render_bev: invalid box for " + b.category);
    lo = lo.cwiseMin(b.box.min.head<2>());
    hi = hi.cwiseMax(b.box.max.head<2>());
  }

  BevImage bev;
  bev.mpp = mpp;
  bev.origin = Vec2(lo.x() - kBevMargin * mpp, hi.y() + kBevMargin * mpp);
  bev.width = bev.col(hi.x()) + 1 + kBevMargin;
  bev.height = bev.row(lo.y()) + 1 + kBevMargin;
  if (static_cast<double>(bev.width) * bev.height > 64.0e6) throw RangeError("render_bev: raster too large");
  bev.image = RgbImage(bev.width, bev.height);

  std::vector<double> top(static_cast<std::size_t>(bev.width) * bev.height, -INFINITY);
  for (const auto& p : points) {
    const int c = bev.col(p.x()), r = bev.row(p.y());
    double& t = top[static_cast<std::size_t>(r) * bev.width + c];
    t = std::max(t, p.z());
  }
  const double span = zhi - zlo;
  for (int r = 0; r < bev.height; ++r) {
    for (int c = 0; c < bev.width; ++c) {
      const double t = top[static_cast<std::size_t>(r) * bev.width + c];
      if (t == -INFINITY) continue;
      const double n = span > 0 ? (t - zlo) / span : 1.0;
      const auto g = static_cast<std::uint8_t>(std::lround(64.0 + 191.0 * n));
      std::uint8_t* px = bev.image.at(c, r);
      px[0] = px[1] = px[2] = g;
    }
  }

  std::vector<std::string> cats;
  for (const auto& b : boxes) cats.push_back(b.category);
  bev.color_key = category_colors(cats);
  for (const auto& b : boxes) {
    const Color col = bev.color_key.at(b.category);
    const int c0 = bev.col(b.box.min.x()), c1 = bev.col(b.box.max.x());
    const int r0 = bev.row(b.box.max.y()), r1 = bev.row(b.box.min.y());
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const bool edge = c - c0 < kBevStroke || c1 - c < kBevStroke || r - r0 < kBevStroke || r1 - r < kBevStroke;
        if (!edge) continue;
        std::uint8_t* px = bev.image.at(c, r);
        px[0] = col[0];
        px[1] = col[1];
        px[2] = col[2];
      }
    }
  }
  return bev;
}

inline netpbm::Image to_netpbm(const RgbImage& img) {
  netpbm::Image out;
  out.width = img.width;
  out.height = img.height;
  out.channels = 3;
  out.maxval = 255;
  out.samples.assign(img.data.begin(), img.data.end());
  return out;
}

inline void write_bev_ppm(const BevImage& bev, const std::string& path) { netpbm::write(path, to_netpbm(bev.image)); }

inline std::string color_hex(const Color& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

}  // namespace gsr
