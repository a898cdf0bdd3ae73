#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/types.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace gsr {

// 2D Delaunay triangulation. Triangles index into `vertices`, which holds the
// input points with exact duplicates removed. Triangles are counterclockwise.
struct Triangulation {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
};

namespace detail {

// Incremental Bowyer-Watson with neighbor links. Cavities are grown by a
// breadth-first search from the triangle containing the new point, so they
// stay connected even when the in-circle test is numerically borderline.
class DelaunayBuilder {
 public:
  explicit DelaunayBuilder(std::vector<Vec2> pts) : pts_(std::move(pts)) {}

  std::vector<std::array<int, 3>> run() {
    const std::size_t n = pts_.size();
    Eigen::AlignedBox2d box;
    for (const auto& p : pts_) box.extend(p);
    const double span = std::max(box.sizes().maxCoeff(), 1e-9);
    const Vec2 mid = box.center();

    // Deterministic sub-nanometer perturbation breaks cocircular and
    // collinear ties on regular sampling grids.
    work_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      work_[i] = pts_[i] + span * 1e-10 * Vec2(hash_unit(2 * i), hash_unit(2 * i + 1));
    }

    const double big = 1e4 * span;
    work_.push_back(mid + Vec2(-big, -big));
    work_.push_back(mid + Vec2(big, -big));
    work_.push_back(mid + Vec2(0, big));
    const int s0 = static_cast<int>(n);
    add_triangle({s0, s0 + 1, s0 + 2}, {-1, -1, -1});

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 t = (pts_[i] - box.min()) / span;
      keys[i] = morton2(static_cast<std::uint32_t>(std::clamp(t.x(), 0.0, 1.0) * 65535.0),
                        static_cast<std::uint32_t>(std::clamp(t.y(), 0.0, 1.0) * 65535.0));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] < keys[b]; });
    for (int i : order) insert(i);

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= s0 || t.v[1] >= s0 || t.v[2] >= s0) continue;
      out.push_back(t.v);
    }
    return out;
  }

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nbr;  // nbr[i] is across the edge opposite v[i]
    bool alive = true;
  };

  static double hash_unit(std::uint64_t x) {
    x = (x ^ (x >> 33)) * 0xff51afd7ed558ccdULL;
    x = (x ^ (x >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return double(x >> 11) / double(1ULL << 53) - 0.5;
  }

  static std::uint64_t spread16(std::uint32_t v) {
    std::uint64_t x = v & 0xffff;
    x = (x | (x << 8)) & 0x00ff00ff;
    x = (x | (x << 4)) & 0x0f0f0f0f;
    x = (x | (x << 2)) & 0x33333333;
    x = (x | (x << 1)) & 0x55555555;
    return x;
  }
  static std::uint64_t morton2(std::uint32_t x, std::uint32_t y) {
    return spread16(x) | (spread16(y) << 1);
  }

  long double orient(int a, int b, const Vec2& p) const {
    const Vec2& pa = work_[a];
    const Vec2& pb = work_[b];
    return (static_cast<long double>(pb.x()) - pa.x()) * (static_cast<long double>(p.y()) - pa.y()) -
           (static_cast<long double>(pb.y()) - pa.y()) * (static_cast<long double>(p.x()) - pa.x());
  }

  bool in_circumcircle(const Tri& t, const Vec2& p) const {
    long double m[3][3];
    for (int i = 0; i < 3; ++i) {
      const Vec2& q = work_[t.v[i]];
      const long double dx = static_cast<long double>(q.x()) - p.x();
      const long double dy = static_cast<long double>(q.y()) - p.y();
      m[i][0] = dx;
      m[i][1] = dy;
      m[i][2] = dx * dx + dy * dy;
    }
    const long double det = m[0][0] * (m[1][1] * m[2][2] - m[2][1] * m[1][2]) -
                            m[0][1] * (m[1][0] * m[2][2] - m[2][0] * m[1][2]) +
                            m[0][2] * (m[1][0] * m[2][1] - m[2][0] * m[1][1]);
    return det > 0;
  }

  int add_triangle(std::array<int, 3> v, std::array<int, 3> nbr) {
    tris_.push_back({v, nbr, true});
    last_ = static_cast<int>(tris_.size()) - 1;
    return last_;
  }

  int locate(const Vec2& p) const {
    int t = last_;
    const std::size_t cap = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < cap; ++step) {
      const Tri& tri = tris_[t];
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        if (orient(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], p) < 0) {
          next = tri.nbr[i];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri& tri = tris_[i];
      if (!tri.alive) continue;
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) inside = orient(tri.v[(e + 1) % 3], tri.v[(e + 2) % 3], p) >= 0;
      if (inside) return static_cast<int>(i);
    }
    return last_;
  }

  void insert(int pi) {
    const Vec2& p = work_[pi];
    const int start = locate(p);

    std::vector<int> cavity{start};
    mark_.resize(tris_.size(), 0);
    ++stamp_;
    if (stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 1;
    }
    mark_[start] = stamp_;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const Tri& t = tris_[cavity[k]];
      for (int nb : t.nbr) {
        if (nb < 0 || mark_[nb] == stamp_) continue;
        if (in_circumcircle(tris_[nb], p)) {
          mark_[nb] = stamp_;
          cavity.push_back(nb);
        }
      }
    }

    struct Edge {
      int a, b, outside;
    };
    std::vector<Edge> boundary;
    for (int ti : cavity) {
      const Tri& t = tris_[ti];
      for (int i = 0; i < 3; ++i) {
        const int nb = t.nbr[i];
        if (nb >= 0 && mark_[nb] == stamp_) continue;
        boundary.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3], nb});
      }
    }
    for (int ti : cavity) tris_[ti].alive = false;

    std::vector<int> created;
    created.reserve(boundary.size());
    for (const Edge& e : boundary) {
      const int nt = add_triangle({pi, e.a, e.b}, {e.outside, -1, -1});
      created.push_back(nt);
      if (e.outside >= 0) {
        Tri& o = tris_[e.outside];
        for (int i = 0; i < 3; ++i) {
          if (o.v[(i + 1) % 3] == e.b && o.v[(i + 2) % 3] == e.a) o.nbr[i] = nt;
        }
      }
    }
    // New triangle (p, a, b): edge (b, p) is opposite a and edge (p, a) is
    // opposite b. Link by matching shared endpoints.
    for (int nt : created) {
      const int a = tris_[nt].v[1];
      const int b = tris_[nt].v[2];
      for (int ot : created) {
        if (ot == nt) continue;
        if (tris_[ot].v[1] == b) tris_[nt].nbr[1] = ot;
        if (tris_[ot].v[2] == a) tris_[nt].nbr[2] = ot;
      }
    }
    mark_.resize(tris_.size(), 0);
  }

  std::vector<Vec2> pts_;
  std::vector<Vec2> work_;
  std::vector<Tri> tris_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  int last_ = 0;
};

}  // namespace detail

inline Triangulation delaunay_2d(std::span<const Vec2> points) {
  Triangulation out;
  out.vertices.assign(points.begin(), points.end());
  for (const auto& p : out.vertices) {
    if (!p.allFinite()) throw InputError("delaunay_2d: non-finite point");
  }
  std::sort(out.vertices.begin(), out.vertices.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
  if (out.vertices.size() < 3) return out;
  out.triangles = detail::DelaunayBuilder(out.vertices).run();
  return out;
}

}  // namespace gsr
