#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/types.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <numeric>
#include <string>
#include <vector>

namespace gsr {

// Corresponding camera-frame points: src from the scale-free
// reconstruction, ref from the metric one. `view` groups pairs per image.
struct PointPair {
  Vec3 src;
  Vec3 ref;
  int view = 0;
};

struct ScaleOptions {
  // Drop this fraction of pairs with the largest residual after the first
  // solve and solve once more. 0 disables trimming.
  double trim_fraction = 0.0;
};

struct ScaleFit {
  double scale = 1.0;
  double residual = 0.0;  // sum of squared distances at `scale`
  std::size_t pairs_used = 0;
  bool clamped = false;  // the unconstrained optimum was not positive
  std::vector<std::string> warnings;
};

// Sum over pairs of |s * src - ref|^2.
inline double scale_residual(std::span<const PointPair> pairs, double s) {
  double r = 0;
  for (const auto& p : pairs) r += (s * p.src - p.ref).squaredNorm();
  return r;
}

namespace detail {

inline double closed_form_scale(std::span<const PointPair> pairs, const std::vector<std::size_t>& use,
                                ScaleFit& fit) {
  double num = 0, den = 0;
  for (std::size_t i : use) {
    num += pairs[i].src.dot(pairs[i].ref);
    den += pairs[i].src.squaredNorm();
  }
  if (!(den > 0)) throw InputError("solve_scale: all source points are at the origin");
  const double s = num / den;
  if (!(s > 0)) {
    fit.clamped = true;
    fit.warnings.push_back("least-squares scale " + std::to_string(s) + " is not positive; clamped");
    return std::numeric_limits<double>::min();
  }
  return s;
}

}  // namespace detail

// Global scale s > 0 minimizing sum |s * src - ref|^2:
// s = sum <src, ref> / sum <src, src>.
inline ScaleFit solve_scale(std::span<const PointPair> pairs, const ScaleOptions& opt = {}) {
  if (pairs.empty()) throw InputError("solve_scale: no point pairs");
  for (const auto& p : pairs) {
    if (!p.src.allFinite() || !p.ref.allFinite()) throw InputError("solve_scale: non-finite coordinate");
  }
  if (opt.trim_fraction < 0 || opt.trim_fraction >= 1) throw InputError("solve_scale: trim fraction must be in [0, 1)");
  ScaleFit fit;
  std::vector<std::size_t> use(pairs.size());
  std::iota(use.begin(), use.end(), std::size_t{0});
  fit.scale = detail::closed_form_scale(pairs, use, fit);

  const std::size_t drop = static_cast<std::size_t>(std::floor(opt.trim_fraction * double(pairs.size())));
  if (drop > 0 && drop < pairs.size()) {
    std::vector<double> res(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) res[i] = (fit.scale * pairs[i].src - pairs[i].ref).squaredNorm();
    std::stable_sort(use.begin(), use.end(), [&](std::size_t a, std::size_t b) { return res[a] < res[b]; });
    use.resize(pairs.size() - drop);
    std::sort(use.begin(), use.end());
    fit.clamped = false;
    fit.warnings.clear();
    fit.scale = detail::closed_form_scale(pairs, use, fit);
  }
  fit.pairs_used = use.size();
  fit.residual = 0;
  for (std::size_t i : use) fit.residual += (fit.scale * pairs[i].src - pairs[i].ref).squaredNorm();
  return fit;
}

}  // namespace gsr
