#pragma once

#include <gsr/core/error.hpp>
#include <gsr/eval/iou.hpp>
#include <gsr/eval/matching.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsr {

inline constexpr double kIouThreshold25 = 0.25;
inline constexpr double kIouThreshold50 = 0.5;

// Fraction of samples whose prediction has IoU strictly above thr with its
// ground truth. A missing prediction scores 0.
inline double acc_at(std::span<const std::optional<Aabb>> preds, std::span<const Aabb> gts, double thr) {
  if (preds.size() != gts.size()) {
    throw InputError("acc_at: " + std::to_string(preds.size()) + " predictions for " + std::to_string(gts.size()) +
                     " ground truths");
  }
  if (gts.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) hits += preds[i] && iou3d(*preds[i], gts[i]) > thr;
  return double(hits) / double(gts.size());
}

struct MatchResult {
  std::size_t true_positives = 0;
  double total_iou = 0;
  std::vector<int> pred_to_gt;  // -1 when unmatched
};

// One-to-one matching with the most pairs above thr; among those, the
// largest total IoU.
inline MatchResult match_boxes(std::span<const Aabb> preds, std::span<const Aabb> gts, double thr) {
  MatchResult out;
  out.pred_to_gt.assign(preds.size(), -1);
  if (preds.empty() || gts.empty()) return out;
  const double bonus = double(std::min(preds.size(), gts.size())) + 1.0;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(preds.size()),
                                            static_cast<Eigen::Index>(gts.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double iou = iou3d(preds[i], gts[j]);
      if (iou > thr) w(i, j) = bonus + iou;
    }
  }
  out.pred_to_gt = max_weight_assignment(w);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int j = out.pred_to_gt[i];
    if (j < 0) continue;
    ++out.true_positives;
    out.total_iou += w(i, j) - bonus;
  }
  return out;
}

struct F1Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t true_positives = 0;
};

inline F1Score f1_at(std::span<const Aabb> preds, std::span<const Aabb> gts, double thr) {
  F1Score s;
  s.true_positives = match_boxes(preds, gts, thr).true_positives;
  if (preds.empty() && gts.empty()) return s;
  s.precision = preds.empty() ? 0.0 : double(s.true_positives) / double(preds.size());
  s.recall = gts.empty() ? 0.0 : double(s.true_positives) / double(gts.size());
  if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

inline std::string normalize_answer(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Case-folded, whitespace-trimmed equality against any alias.
inline int exact_match(std::string_view pred, std::span<const std::string> aliases) {
  const std::string p = normalize_answer(pred);
  for (const auto& a : aliases) {
    if (normalize_answer(a) == p) return 1;
  }
  return 0;
}

inline int exact_match(std::string_view pred, std::string_view gt) {
  const std::string alias(gt);
  return exact_match(pred, std::span<const std::string>(&alias, 1));
}

// Mean over thresholds theta in {0.50, 0.55, ..., 0.95} of
// [|pred - gt| / gt < 1 - theta]. Relative errors within 1e-12 of a
// threshold count as on it (not below).
inline double numeric_score(double pred, double gt) {
  if (!(gt > 0)) throw InputError("numeric_score: ground truth must be positive");
  if (!std::isfinite(pred)) return 0.0;
  const double rel = std::abs(pred - gt) / gt;
  int pass = 0;
  for (int i = 0; i < 10; ++i) {
    const double tolerance = double(50 - 5 * i) / 100.0;  // 1 - theta
    pass += rel < tolerance - 1e-12;
  }
  return pass / 10.0;
}

}  // namespace gsr
