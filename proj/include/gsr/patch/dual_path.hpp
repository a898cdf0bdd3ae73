#pragma once

#include <gsr/core/error.hpp>
#include <gsr/patch/point_set.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace gsr {

inline constexpr double kIdwEpsilon = 1e-8;  // meters
inline constexpr int kIdwNeighbors = 3;

// Cross-attention projections: query D_s x d, key C x d, value C x C_out.
struct SemanticPoolWeights {
  Matrix query;
  Matrix key;
  Matrix value;
};

struct SemanticPoolResult {
  RowVector feature;  // C_out
  Vector attention;   // K, sums to 1
};

// Semantic-aligned pooling: the patch's semantic feature queries the K
// geometric features of the patch.
inline SemanticPoolResult semantic_aligned_pool(const RowVector& semantic, const Matrix& geo,
                                                const SemanticPoolWeights& w) {
  if (geo.rows() == 0) throw InputError("semantic_aligned_pool: no geometric features");
  if (semantic.size() != w.query.rows()) {
    throw InputError("semantic_aligned_pool: semantic width " + std::to_string(semantic.size()) +
                     " does not match query projection rows " + std::to_string(w.query.rows()));
  }
  if (geo.cols() != w.key.rows() || geo.cols() != w.value.rows()) {
    throw InputError("semantic_aligned_pool: geometric width " + std::to_string(geo.cols()) +
                     " does not match key/value projections");
  }
  if (w.query.cols() != w.key.cols()) throw InputError("semantic_aligned_pool: query/key head dims differ");

  const RowVector q = semantic * w.query;
  const Matrix k = geo * w.key;
  const Matrix v = geo * w.value;
  Vector logits = (k * q.transpose()) / std::sqrt(double(w.query.cols()));
  const double mx = logits.maxCoeff();
  Vector a = (logits.array() - mx).exp().matrix();
  a /= a.sum();
  // Identical rows: the weighted sum would only add rounding to the shared value.
  bool same = true;
  for (Eigen::Index j = 1; j < geo.rows() && same; ++j) same = geo.row(j) == geo.row(0);
  if (same) return {geo.row(0) * w.value, a};
  return {a.transpose() * v, a};
}

// Position-aligned sampling: inverse-distance-weighted interpolation of the
// geometric features at `center` from its nearest samples (ties by sample
// index). A sample within eps of the center is returned exactly.
inline RowVector position_aligned_sample(const Vec3& center, std::span<const Vec3> samples, const Matrix& geo,
                                         int neighbors = kIdwNeighbors, double eps = kIdwEpsilon) {
  if (samples.empty()) throw InputError("position_aligned_sample: no valid samples");
  if (static_cast<Eigen::Index>(samples.size()) != geo.rows()) {
    throw InputError("position_aligned_sample: " + std::to_string(samples.size()) + " samples but " +
                     std::to_string(geo.rows()) + " feature rows");
  }
  std::vector<double> dist(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) dist[i] = (samples[i] - center).norm();
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(std::max(neighbors, 1)), samples.size());
  std::partial_sort(order.begin(), order.begin() + m, order.end(), [&](std::size_t a, std::size_t b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  });
  if (dist[order[0]] < eps) return geo.row(order[0]);
  RowVector out = RowVector::Zero(geo.cols());
  double total = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double w = 1.0 / (dist[order[j]] + eps);
    out += w * geo.row(order[j]);
    total += w;
  }
  return out / total;
}

}  // namespace gsr
