#include <gsr/core/random.hpp>
#include <gsr/eval/iou.hpp>
#include <gsr/eval/matching.hpp>
#include <gsr/eval/metrics.hpp>
#include <gsr/eval/report.hpp>
#include <gsr/respond/emit.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace gsr;

namespace {

Aabb box(double a, double b, double c, double d, double e, double f) {
  return Aabb::from_corners(Vec3(a, b, c), Vec3(d, e, f));
}

Aabb unit_at(double x, double y = 0, double z = 0) { return box(x, y, z, x + 1, y + 1, z + 1); }

Aabb random_box(Rng& rng, double spread = 2.0) {
  std::uniform_real_distribution<double> c(0, spread), e(0.2, 1.2);
  const Vec3 lo(c(rng), c(rng), c(rng));
  return {lo, lo + Vec3(e(rng), e(rng), e(rng))};
}

std::vector<std::vector<double>> iou_matrix(const std::vector<Aabb>& p, const std::vector<Aabb>& g) {
  std::vector<std::vector<double>> m(p.size(), std::vector<double>(g.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) m[i][j] = iou3d(p[i], g[j]);
  }
  return m;
}

}  // namespace

TEST(Iou3d, Examples) {
  EXPECT_DOUBLE_EQ(iou3d(unit_at(0), unit_at(0)), 1.0);
  EXPECT_NEAR(iou3d(unit_at(0), unit_at(0.5)), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(iou3d(unit_at(0), unit_at(2)), 0.0);
  EXPECT_EQ(iou3d(unit_at(0), unit_at(1)), 0.0);
  const Aabb flat = box(0, 0, 0, 1, 1, 0);
  EXPECT_EQ(iou3d(flat, flat), 0.0);
}

TEST(Iou3d, MonteCarloOracle) {
  Rng rng(1), mc(2);
  EXPECT_NEAR(oracle::monte_carlo_iou(unit_at(0), unit_at(0.5), 1000000, mc), 1.0 / 3.0, 1e-2);
  for (int i = 0; i < 20; ++i) {
    const Aabb a = random_box(rng, 0.8), b = random_box(rng, 0.8);
    EXPECT_NEAR(iou3d(a, b), oracle::monte_carlo_iou(a, b, 200000, mc), 1e-2);
  }
}

TEST(Iou3d, SymmetricTranslationAndScaleInvariant) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Aabb a = random_box(rng), b = random_box(rng);
    const double v = iou3d(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_DOUBLE_EQ(v, iou3d(b, a));
    const Vec3 t(3.1, -2.2, 0.7);
    EXPECT_NEAR(iou3d({a.min + t, a.max + t}, {b.min + t, b.max + t}), v, 1e-12);
    EXPECT_NEAR(iou3d({a.min * 2.5, a.max * 2.5}, {b.min * 2.5, b.max * 2.5}), v, 1e-12);
  }
}

TEST(AccAt, Examples) {
  const std::vector<Aabb> gts{unit_at(0), unit_at(5), unit_at(10)};
  const std::vector<std::optional<Aabb>> exact{gts[0], gts[1], gts[2]};
  EXPECT_DOUBLE_EQ(acc_at(exact, gts, 0.5), 1.0);
  const std::vector<std::optional<Aabb>> none(3);
  EXPECT_DOUBLE_EQ(acc_at(none, gts, 0.25), 0.0);
  const std::vector<std::optional<Aabb>> two{gts[0], unit_at(5.1), unit_at(20)};
  EXPECT_NEAR(acc_at(two, gts, 0.5), 2.0 / 3.0, 1e-12);
  EXPECT_THROW(acc_at(none, std::vector<Aabb>{gts[0]}, 0.5), InputError);
}

TEST(AccAt, StrictThreshold) {
  // IoU exactly 1/3 at offset 0.5: not above 1/3.
  const std::vector<Aabb> gts{unit_at(0)};
  const std::vector<std::optional<Aabb>> p{unit_at(0.5)};
  EXPECT_DOUBLE_EQ(acc_at(p, gts, 0.25), 1.0);
  EXPECT_DOUBLE_EQ(acc_at(p, gts, iou3d(unit_at(0), unit_at(0.5))), 0.0);
}

TEST(F1At, Examples) {
  const std::vector<Aabb> gts{unit_at(0), unit_at(5), unit_at(10)};
  EXPECT_DOUBLE_EQ(f1_at(gts, gts, 0.5).f1, 1.0);
  EXPECT_DOUBLE_EQ(f1_at({}, gts, 0.5).f1, 0.0);
  EXPECT_DOUBLE_EQ(f1_at(gts, {}, 0.5).f1, 0.0);
  EXPECT_DOUBLE_EQ(f1_at({}, {}, 0.5).f1, 0.0);
  const std::vector<Aabb> preds{unit_at(0.1), unit_at(30)};
  const F1Score s = f1_at(preds, gts, 0.5);
  EXPECT_EQ(s.true_positives, 1u);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_NEAR(s.recall, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.f1, 0.4, 1e-12);
  EXPECT_EQ(oracle::brute_force_matches(iou_matrix(preds, gts), 0.5), 1);
}

TEST(F1At, OptimalBeatsGreedyOnCrossingOverlaps) {
  // Greedy by best IoU pairs p0-g0 and leaves p1 without a partner.
  const std::vector<Aabb> gts{unit_at(0), unit_at(0.6)};
  const std::vector<Aabb> preds{unit_at(0.3), unit_at(-0.3)};
  const F1Score s = f1_at(preds, gts, 0.3);
  EXPECT_EQ(int(s.true_positives), oracle::brute_force_matches(iou_matrix(preds, gts), 0.3));
  EXPECT_EQ(s.true_positives, 2u);
}

TEST(F1At, MatchesExhaustiveOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Aabb> p, g;
    const std::size_t np = uniform_index(rng, 7), ng = uniform_index(rng, 7);
    for (std::size_t i = 0; i < np; ++i) p.push_back(random_box(rng, 1.5));
    for (std::size_t i = 0; i < ng; ++i) g.push_back(random_box(rng, 1.5));
    for (double thr : {0.1, 0.25, 0.5}) {
      const auto m = iou_matrix(p, g);
      const auto [count, total] = oracle::brute_force_best(m, thr);
      const MatchResult r = match_boxes(p, g, thr);
      ASSERT_EQ(int(r.true_positives), count);
      EXPECT_NEAR(r.total_iou, total, 1e-9);
      EXPECT_NEAR(f1_at(p, g, thr).f1, oracle::f1_from_counts(count, int(np), int(ng)), 1e-12);
      std::vector<char> used(ng, 0);
      for (std::size_t i = 0; i < np; ++i) {
        const int j = r.pred_to_gt[i];
        if (j < 0) continue;
        EXPECT_GT(m[i][j], thr);
        EXPECT_FALSE(used[j]);
        used[j] = 1;
      }
    }
  }
}

TEST(F1At, TieBreakTowardTotalIou) {
  // Both one-pair matchings have cardinality 1; the higher-IoU pair wins.
  const std::vector<Aabb> gts{unit_at(0)};
  const std::vector<Aabb> preds{unit_at(0.4), unit_at(0.1)};
  const MatchResult r = match_boxes(preds, gts, 0.25);
  EXPECT_EQ(r.pred_to_gt, (std::vector<int>{-1, 0}));
}

TEST(F1At, PermutationInvariantAndMonotone) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Aabb> p, g;
    for (int i = 0; i < 5; ++i) p.push_back(random_box(rng, 1.0));
    for (int i = 0; i < 4; ++i) g.push_back(random_box(rng, 1.0));
    const double base = f1_at(p, g, 0.25).f1;
    std::shuffle(p.begin(), p.end(), rng);
    std::shuffle(g.begin(), g.end(), rng);
    EXPECT_DOUBLE_EQ(f1_at(p, g, 0.25).f1, base);
    double prev = 1.0;
    for (double thr = 0.0; thr < 1.0; thr += 0.05) {
      const double f = f1_at(p, g, thr).f1;
      EXPECT_LE(f, prev + 1e-15);
      prev = f;
    }
  }
}

TEST(Assignment, RectangularAndNonPositive) {
  Eigen::MatrixXd w(2, 3);
  w << 1, 5, 0, 4, 6, 0;
  EXPECT_EQ(max_weight_assignment(w), (std::vector<int>{1, 0}));
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 2);
  EXPECT_EQ(max_weight_assignment(z), (std::vector<int>{-1, -1, -1}));
  EXPECT_TRUE(max_weight_assignment(Eigen::MatrixXd(0, 4)).empty());
}

TEST(ExactMatch, Examples) {
  EXPECT_EQ(exact_match("Brown", "brown"), 1);
  const std::vector<std::string> aliases{"table", "on the table"};
  EXPECT_EQ(exact_match("on the table", aliases), 1);
  EXPECT_EQ(exact_match("  ON THE TABLE\n", aliases), 1);
  EXPECT_EQ(exact_match("chairs", "chair"), 0);
  EXPECT_EQ(exact_match("", "a"), 0);
}

TEST(NumericScore, Examples) {
  EXPECT_DOUBLE_EQ(numeric_score(3.0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(numeric_score(6.0, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(numeric_score(1.2 * 5.0, 5.0), 0.6);
  EXPECT_DOUBLE_EQ(numeric_score(0.8 * 5.0, 5.0), 0.6);
  EXPECT_THROW(numeric_score(1.0, 0.0), InputError);
  EXPECT_THROW(numeric_score(1.0, -2.0), InputError);
  EXPECT_DOUBLE_EQ(numeric_score(std::nan(""), 2.0), 0.0);
}

TEST(NumericScore, EnumeratedThresholds) {
  // Independent enumeration with exact rational thresholds in hundredths.
  for (int pct = 0; pct <= 120; ++pct) {
    int pass = 0;
    for (int t = 50; t <= 95; t += 5) pass += pct < 100 - t;
    EXPECT_DOUBLE_EQ(numeric_score(10.0 * (1 + pct / 100.0), 10.0), pass / 10.0) << pct;
  }
}

TEST(NumericScore, NonIncreasingInError) {
  double prev = 1.0;
  for (double e = 0; e < 1.2; e += 0.001) {
    const double s = numeric_score(7.0 + 7.0 * e, 7.0);
    EXPECT_LE(s, prev);
    prev = s;
  }
}

namespace {

QaSample sample(std::string id, TaskKind task, std::string answer, std::vector<Grounding> g = {}) {
  QaSample q;
  q.id = std::move(id);
  q.task = task;
  q.answer = std::move(answer);
  q.groundings = std::move(g);
  return q;
}

std::string response(const std::vector<Grounding>& g, const std::string& answer) {
  ResponseAst a;
  a.analysis = "x";
  a.groundings = g;
  a.answer = answer;
  return emit_response(a);
}

}  // namespace

TEST(Evaluate, MixedReport) {
  const Grounding chair{"chair", 1, {unit_at(0)}};
  const Grounding tv{"tv", 1, {unit_at(5)}};
  const Grounding chairs{"chair", 2, {unit_at(0), unit_at(3)}};
  const std::vector<QaSample> gt{
      sample("s/rel_direction/0", TaskKind::kRelDirection, "A", {chair, tv}),
      sample("s/object_count/0", TaskKind::kObjectCount, "2", {chairs}),
      sample("s/room_size/0", TaskKind::kRoomSize, "30.0"),
      sample("s/abs_distance/0", TaskKind::kAbsDistance, "1.0", {chair, tv}),
  };
  std::map<std::string, std::string> pred{
      {"s/rel_direction/0", response({{"chair", 1, {unit_at(0.7)}}, tv}, "a")},
      {"s/object_count/0", response({{"chair", 1, {unit_at(0)}}}, "3")},
      {"s/room_size/0", "garbage"},
  };
  const EvalReport r = evaluate(gt, pred);
  EXPECT_EQ(r.samples, 4u);
  EXPECT_EQ(r.missing, 1u);
  EXPECT_EQ(r.parse_errors, 1u);
  // Single-box entries: chair@0.7 (IoU 0.18), tv exact, and two missing ones.
  EXPECT_EQ(r.acc25.count, 4u);
  EXPECT_DOUBLE_EQ(r.acc25.mean(), 1.0 / 4.0);
  EXPECT_DOUBLE_EQ(r.acc50.mean(), 1.0 / 4.0);
  // F1 per sample: rel_direction 1 TP of 2/2; object_count 1 TP, 1 pred vs 2 gt; abs_distance none.
  EXPECT_EQ(r.f1_25.count, 3u);
  EXPECT_NEAR(r.f1_25.mean(), (0.5 + oracle::f1_from_counts(1, 1, 2) + 0.0) / 3.0, 1e-12);
  // Numeric: count 3 vs 2 -> rel 0.5 -> 0; room unparsable -> 0; distance missing -> 0.
  EXPECT_EQ(r.numeric.count, 3u);
  EXPECT_DOUBLE_EQ(r.numeric.mean(), 0.0);
  EXPECT_EQ(r.exact.count, 1u);
  EXPECT_DOUBLE_EQ(r.exact.mean(), 1.0);
  EXPECT_DOUBLE_EQ(r.per_task.at("rel_direction").mean(), 1.0);

  const auto j = report_json(r);
  EXPECT_DOUBLE_EQ(j["acc@25"]["value"].get<double>(), 0.25);
  EXPECT_EQ(j["samples"].get<int>(), 4);
  EXPECT_NE(report_table(r).find("acc@50"), std::string::npos);
}

TEST(Evaluate, SelfPredictionIsPerfect) {
  const Grounding chair{"chair", 1, {unit_at(0)}};
  std::vector<QaSample> gt{sample("a", TaskKind::kAbsDistance, "2.5", {chair, {"tv", 1, {unit_at(4)}}}),
                           sample("b", TaskKind::kRelDirection, "B", {chair})};
  std::map<std::string, std::string> pred;
  for (auto& q : gt) {
    q.response = response(q.groundings, q.answer);
    pred[q.id] = q.response;
  }
  const EvalReport r = evaluate(gt, pred);
  EXPECT_DOUBLE_EQ(r.acc50.mean(), 1.0);
  EXPECT_DOUBLE_EQ(r.f1_50.mean(), 1.0);
  EXPECT_DOUBLE_EQ(r.numeric.mean(), 1.0);
  EXPECT_DOUBLE_EQ(r.exact.mean(), 1.0);
}
