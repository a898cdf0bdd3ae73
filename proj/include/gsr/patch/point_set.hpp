#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/types.hpp>

#include <Eigen/Core>

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gsr {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;

// Positions (n) with per-point attribute rows (n x c).
struct PointSet {
  std::vector<Vec3> positions;
  Matrix features;

  std::size_t size() const { return positions.size(); }
  Eigen::Index channels() const { return features.cols(); }

  void check() const {
    if (static_cast<Eigen::Index>(positions.size()) != features.rows()) {
      throw InputError("PointSet: " + std::to_string(positions.size()) + " positions but " +
                       std::to_string(features.rows()) + " attribute rows");
    }
  }
};

struct PooledPoint {
  Vec3 position;
  RowVector feature;
};

// Pools the members `idx` of `set`: feature = max_j (f_j U), position =
// mean_j p_j.
inline PooledPoint pool_members(const PointSet& set, std::span<const std::size_t> idx, const Matrix& u) {
  if (idx.empty()) throw InputError("pool: empty subset");
  if (set.channels() != u.rows()) {
    throw InputError("pool: attribute width " + std::to_string(set.channels()) + " does not match projection rows " +
                     std::to_string(u.rows()));
  }
  PooledPoint out{Vec3::Zero(), RowVector::Constant(u.cols(), -std::numeric_limits<double>::infinity())};
  for (std::size_t j : idx) {
    out.feature = out.feature.cwiseMax(set.features.row(j) * u);
    out.position += set.positions[j];
  }
  out.position /= double(idx.size());
  return out;
}

inline PooledPoint pool_subset(const PointSet& subset, const Matrix& u) {
  subset.check();
  std::vector<std::size_t> idx(subset.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return pool_members(subset, idx, u);
}

// Broadcasts coarse features back to the fine points and appends them:
// out_i = concat(fine_i, coarse_{mapping[i]}).
inline Matrix unpool(const Matrix& fine, const Matrix& coarse, std::span<const int> mapping) {
  if (static_cast<Eigen::Index>(mapping.size()) != fine.rows()) {
    throw InputError("unpool: mapping covers " + std::to_string(mapping.size()) + " of " +
                     std::to_string(fine.rows()) + " fine points");
  }
  Matrix out(fine.rows(), fine.cols() + coarse.cols());
  for (Eigen::Index i = 0; i < fine.rows(); ++i) {
    const int j = mapping[i];
    if (j < 0 || j >= coarse.rows()) {
      throw InputError("unpool: fine point " + std::to_string(i) + " is not mapped to a coarse subset");
    }
    out.row(i) << fine.row(i), coarse.row(j);
  }
  return out;
}

}  // namespace gsr
