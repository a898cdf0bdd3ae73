#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/morton.hpp>
#include <gsr/patch/point_set.hpp>
#include <gsr/patch/weights.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace gsr {

// Serialized point encoder: per stage, Morton ordering, grouped
// self-attention over consecutive runs of `group_size` points, then
// max/mean pooling of each group into the next stage. Features are unpooled
// back to the input points by concatenation, so the output width is the sum
// of all stage widths.
struct EncoderConfig {
  int in_channels = 6;
  int group_size = 16;
  std::vector<int> widths{32, 64};
  std::vector<double> voxel_sizes{0.02, 0.08};  // meters, one per stage
  int head_dim = 16;

  int stages() const { return static_cast<int>(widths.size()); }
  int out_channels() const { return std::accumulate(widths.begin(), widths.end(), 0); }

  void validate() const {
    if (widths.empty()) throw InputError("encoder: at least one stage required");
    if (group_size < 2) throw InputError("encoder: group size must be >= 2");
    if (voxel_sizes.size() != widths.size()) throw InputError("encoder: one voxel size per stage required");
    if (in_channels < 1 || head_dim < 1) throw InputError("encoder: channel counts must be positive");
    for (std::size_t s = 0; s < widths.size(); ++s) {
      if (widths[s] < 1) throw InputError("encoder: stage widths must be positive");
      if (s > 0 && widths[s] < widths[s - 1]) throw InputError("encoder: stage widths must be non-decreasing");
      if (!(voxel_sizes[s] > 0)) throw InputError("encoder: voxel sizes must be positive");
    }
  }
};

inline std::string stage_prefix(int s) { return "encoder.stage" + std::to_string(s); }

inline std::vector<TensorSpec> encoder_weight_specs(const EncoderConfig& cfg) {
  cfg.validate();
  std::vector<TensorSpec> specs{{"encoder.embed.weight", cfg.in_channels, cfg.widths[0]},
                                {"encoder.embed.bias", 1, cfg.widths[0]}};
  for (int s = 0; s < cfg.stages(); ++s) {
    const int w = cfg.widths[s];
    specs.push_back({stage_prefix(s) + ".attn.query", w, cfg.head_dim});
    specs.push_back({stage_prefix(s) + ".attn.key", w, cfg.head_dim});
    specs.push_back({stage_prefix(s) + ".attn.value", w, w});
    if (s + 1 < cfg.stages()) specs.push_back({stage_prefix(s) + ".pool", w, cfg.widths[s + 1]});
  }
  return specs;
}

namespace detail {

inline bool row_less(const Matrix& m, std::size_t a, std::size_t b) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (m(a, c) != m(b, c)) return m(a, c) < m(b, c);
  }
  return false;
}

inline bool point_less(const PointSet& set, std::size_t a, std::size_t b) {
  const Vec3& pa = set.positions[a];
  const Vec3& pb = set.positions[b];
  for (int k = 0; k < 3; ++k) {
    if (pa[k] != pb[k]) return pa[k] < pb[k];
  }
  return row_less(set.features, a, b);
}

// Morton order refined by coordinates and attributes, so the order depends
// only on the point values and not on their input positions.
inline std::vector<std::size_t> canonical_order(const PointSet& set, double voxel) {
  const auto codes = morton_codes(set.positions, voxel);
  std::vector<std::size_t> order(set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (codes[a] != codes[b]) return codes[a] < codes[b];
    return point_less(set, a, b);
  });
  return order;
}

// Single-head scaled dot-product self-attention with a residual connection.
inline Matrix group_attention(const Matrix& x, const Matrix& wq, const Matrix& wk, const Matrix& wv) {
  const Matrix q = x * wq;
  const Matrix k = x * wk;
  const Matrix v = x * wv;
  Matrix logits = (q * k.transpose()) / std::sqrt(double(wq.cols()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp().matrix();
    logits.row(r) /= logits.row(r).sum();
  }
  return x + logits * v;
}

}  // namespace detail

// Per-point features (n x out_channels) aligned with the input points.
// Exact duplicate points (same position and attributes) are encoded once
// and share their output row.
inline Matrix encode_points(const PointSet& points, const EncoderConfig& cfg, const WeightStore& weights) {
  cfg.validate();
  points.check();
  if (points.size() == 0) throw InputError("encode_points: empty point set");
  if (points.channels() != cfg.in_channels) {
    throw InputError("encode_points: expected " + std::to_string(cfg.in_channels) + " attribute channels, got " +
                     std::to_string(points.channels()));
  }
  weights.require(encoder_weight_specs(cfg));

  // Collapse exact duplicates.
  std::vector<std::size_t> sorted(points.size());
  std::iota(sorted.begin(), sorted.end(), std::size_t{0});
  std::sort(sorted.begin(), sorted.end(),
            [&](std::size_t a, std::size_t b) { return detail::point_less(points, a, b); });
  std::vector<int> unique_of(points.size());
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k == 0 || detail::point_less(points, sorted[k - 1], sorted[k])) reps.push_back(sorted[k]);
    unique_of[sorted[k]] = static_cast<int>(reps.size()) - 1;
  }

  PointSet level;
  level.positions.reserve(reps.size());
  Matrix attrs(static_cast<Eigen::Index>(reps.size()), points.channels());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    level.positions.push_back(points.positions[reps[i]]);
    attrs.row(i) = points.features.row(reps[i]);
  }
  const Matrix& embed = weights.get("encoder.embed.weight");
  const Matrix& bias = weights.get("encoder.embed.bias");
  level.features = (attrs * embed).rowwise() + bias.row(0);

  std::vector<Matrix> stage_features;
  std::vector<std::vector<int>> mappings;
  for (int s = 0; s < cfg.stages(); ++s) {
    const std::string pre = stage_prefix(s);
    const Matrix& wq = weights.get(pre + ".attn.query");
    const Matrix& wk = weights.get(pre + ".attn.key");
    const Matrix& wv = weights.get(pre + ".attn.value");
    const auto order = detail::canonical_order(level, cfg.voxel_sizes[s]);
    const std::size_t g = static_cast<std::size_t>(cfg.group_size);
    const std::size_t groups = (order.size() + g - 1) / g;

    Matrix attended(level.features.rows(), level.features.cols());
    for (std::size_t j = 0; j < groups; ++j) {
      const std::size_t begin = j * g;
      const std::size_t end = std::min(order.size(), begin + g);
      Matrix x(static_cast<Eigen::Index>(end - begin), level.features.cols());
      for (std::size_t k = begin; k < end; ++k) x.row(k - begin) = level.features.row(order[k]);
      const Matrix y = detail::group_attention(x, wq, wk, wv);
      for (std::size_t k = begin; k < end; ++k) attended.row(order[k]) = y.row(k - begin);
    }
    level.features = std::move(attended);
    stage_features.push_back(level.features);

    if (s + 1 == cfg.stages()) break;
    const Matrix& u = weights.get(pre + ".pool");
    PointSet next;
    next.features.resize(static_cast<Eigen::Index>(groups), u.cols());
    std::vector<int> mapping(order.size());
    for (std::size_t j = 0; j < groups; ++j) {
      const std::size_t begin = j * g;
      const std::size_t end = std::min(order.size(), begin + g);
      const std::span<const std::size_t> members(order.data() + begin, end - begin);
      const PooledPoint pooled = pool_members(level, members, u);
      next.positions.push_back(pooled.position);
      next.features.row(j) = pooled.feature;
      for (std::size_t m : members) mapping[m] = static_cast<int>(j);
    }
    mappings.push_back(std::move(mapping));
    level = std::move(next);
  }

  Matrix up = stage_features.back();
  for (int s = cfg.stages() - 2; s >= 0; --s) up = unpool(stage_features[s], up, mappings[s]);

  Matrix out(static_cast<Eigen::Index>(points.size()), up.cols());
  for (std::size_t i = 0; i < points.size(); ++i) out.row(i) = up.row(unique_of[i]);
  return out;
}

}  // namespace gsr
