#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/point_set.hpp>
#include <gsr/patch/weights.hpp>
#include <gsr/scene/bundle.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>

namespace gsr {

// Produces one semantic feature row per image patch (row-major over the
// H' x W' grid) for a frame.
class SemanticEncoder {
 public:
  virtual ~SemanticEncoder() = default;
  virtual int dim() const = 0;
  virtual Matrix encode(const Frame& frame, int frame_index, int patch_size, int rows, int cols) const = 0;
};

inline constexpr int kDescriptorWidth = 20;

// Hand-crafted descriptor of one patch: mean RGB of each quadrant (12
// values in [0,1]) followed by an 8-bin gradient orientation histogram of
// the gray image, weighted by gradient magnitude and normalized to sum 1.
inline RowVector patch_descriptor(const RgbImage& img, int u0, int v0, int p) {
  RowVector d = RowVector::Zero(kDescriptorWidth);
  if (img.empty()) return d;
  auto gray = [&](int u, int v) {
    u = std::clamp(u, 0, img.width - 1);
    v = std::clamp(v, 0, img.height - 1);
    const auto* px = img.at(u, v);
    return (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
  };
  const int half = std::max(p / 2, 1);
  double counts[4] = {0, 0, 0, 0};
  double mag_total = 0;
  for (int v = v0; v < v0 + p; ++v) {
    for (int u = u0; u < u0 + p; ++u) {
      const int q = (v - v0 >= half ? 2 : 0) + (u - u0 >= half ? 1 : 0);
      const auto* px = img.at(u, v);
      for (int c = 0; c < 3; ++c) d(q * 3 + c) += px[c] / 255.0;
      counts[q] += 1;
      const double gx = gray(u + 1, v) - gray(u - 1, v);
      const double gy = gray(u, v + 1) - gray(u, v - 1);
      const double mag = std::hypot(gx, gy);
      if (mag <= 0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0) angle += 2 * std::numbers::pi;
      const int bin = std::min(7, static_cast<int>(angle / (2 * std::numbers::pi) * 8));
      d(12 + bin) += mag;
      mag_total += mag;
    }
  }
  for (int q = 0; q < 4; ++q) {
    if (counts[q] > 0) d.segment(q * 3, 3) /= counts[q];
  }
  if (mag_total > 0) d.tail(8) /= mag_total;
  return d;
}

// Reference encoder: patch_descriptor projected to `dim` by the
// "semantic.proj" tensor (20 x dim). Frames without an image encode to the
// projection of a zero descriptor.
class DescriptorSemanticEncoder final : public SemanticEncoder {
 public:
  explicit DescriptorSemanticEncoder(Matrix projection) : projection_(std::move(projection)) {
    if (projection_.rows() != kDescriptorWidth) throw InputError("descriptor encoder: projection must have 20 rows");
  }

  int dim() const override { return static_cast<int>(projection_.cols()); }

  Matrix encode(const Frame& frame, int, int patch_size, int rows, int cols) const override {
    Matrix out(rows * cols, dim());
    for (int h = 0; h < rows; ++h) {
      for (int w = 0; w < cols; ++w) {
        out.row(h * cols + w) = patch_descriptor(frame.image, w * patch_size, h * patch_size, patch_size) * projection_;
      }
    }
    return out;
  }

 private:
  Matrix projection_;
};

// Features computed elsewhere (e.g. by a vision backbone) and stored in a
// GSW1 file as tensors "semantic.frameNNNN" of shape (H' W') x D_s.
class PrecomputedSemanticEncoder final : public SemanticEncoder {
 public:
  PrecomputedSemanticEncoder(WeightStore store, int dim) : store_(std::move(store)), dim_(dim) {}

  int dim() const override { return dim_; }

  Matrix encode(const Frame&, int frame_index, int, int rows, int cols) const override {
    char name[32];
    std::snprintf(name, sizeof name, "semantic.frame%04d", frame_index);
    return store_.get(name, rows * cols, dim_);
  }

 private:
  WeightStore store_;
  int dim_;
};

}  // namespace gsr
