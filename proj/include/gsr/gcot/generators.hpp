#pragma once

#include <gsr/core/error.hpp>
#include <gsr/core/random.hpp>
#include <gsr/gcot/qa.hpp>
#include <gsr/gcot/scene_meta.hpp>
#include <gsr/gcot/templates.hpp>
#include <gsr/respond/emit.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gsr {

class AmbiguousDirection : public Error {
 public:
  using Error::Error;
};

enum class Direction { kLeft, kRight };

inline constexpr double kStraightThresholdDeg = 15.0;
inline constexpr int kMaxResample = 100;

// Side of the target as seen from the observer looking at the facing object,
// in the xy plane with z up.
inline double direction_cross(const Aabb& observer, const Aabb& facing, const Aabb& target) {
  const Vec2 o = observer.center().head<2>();
  const Vec2 f = facing.center().head<2>() - o;
  const Vec2 t = target.center().head<2>() - o;
  return f.x() * t.y() - f.y() * t.x();
}

inline Direction rel_direction(const Aabb& observer, const Aabb& facing, const Aabb& target) {
  if ((facing.center().head<2>() - observer.center().head<2>()).norm() < 1e-9) {
    throw AmbiguousDirection("rel_direction: observer and facing object coincide in xy");
  }
  const double c = direction_cross(observer, facing, target);
  if (std::abs(c) < 1e-9) throw AmbiguousDirection("rel_direction: target is collinear with the view line");
  return c > 0 ? Direction::kLeft : Direction::kRight;
}

// The complete response text: analysis, optional grounding line, steps, answer.
inline std::string assemble_answer(const std::string& analysis, const std::vector<Grounding>& groundings,
                                   const std::string& steps, const std::string& final_answer) {
  return emit_response({analysis, groundings, steps, final_answer});
}

namespace detail {

inline std::string fmt3(double v) { return format_fixed(v, 3); }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// k distinct elements in random order.
template <typename T>
std::vector<T> pick(const std::vector<T>& pool, std::size_t k, Rng& rng) {
  std::vector<T> v = pool;
  for (std::size_t i = 0; i < k; ++i) std::swap(v[i], v[i + uniform_index(rng, v.size() - i)]);
  v.resize(k);
  return v;
}

// Boxes grouped by category, categories in first-mention order.
inline std::vector<Grounding> group_groundings(const std::vector<const ObjectRecord*>& objs) {
  std::vector<Grounding> out;
  for (const auto* o : objs) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Grounding& g) { return g.name == o->category; });
    if (it == out.end()) {
      out.push_back({o->category, 0, {}});
      it = out.end() - 1;
    }
    if (std::find(it->boxes.begin(), it->boxes.end(), o->box) == it->boxes.end()) {
      it->boxes.push_back(o->box);
      ++it->count;
    }
  }
  return out;
}

inline std::string with_options(std::string question, const std::vector<std::string>& options) {
  if (options.empty()) return question;
  question += " Options:";
  for (const auto& o : options) question += " " + o;
  return question;
}

inline std::vector<std::string> lettered(const std::vector<std::string>& choices) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < choices.size(); ++i) out.push_back(option_letter(i) + ". " + choices[i]);
  return out;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

inline std::string centroid_lines(const Aabb& b) {
  const Vec3 c = b.center();
  return "- x = (" + format_coord(b.min.x()) + " + " + format_coord(b.max.x()) + ")/2 = " + fmt3(c.x()) + "\n" +
         "- y = (" + format_coord(b.min.y()) + " + " + format_coord(b.max.y()) + ")/2 = " + fmt3(c.y()) + "\n" +
         "- z = (" + format_coord(b.min.z()) + " + " + format_coord(b.max.z()) + ")/2 = " + fmt3(c.z());
}

inline std::string centroid_lines_xy(const Aabb& b) {
  const Vec3 c = b.center();
  return "- x = (" + format_coord(b.min.x()) + " + " + format_coord(b.max.x()) + ")/2 = " + fmt3(c.x()) + "\n" +
         "- y = (" + format_coord(b.min.y()) + " + " + format_coord(b.max.y()) + ")/2 = " + fmt3(c.y());
}

inline QaSample start_sample(const SceneMetadata& s, TaskKind task) {
  QaSample q;
  q.scene_id = s.scene_id;
  q.task = task;
  return q;
}

inline void finish(QaSample& q) {
  q.response = assemble_answer(q.analysis, q.groundings, q.steps, q.answer);
}

// A response without the grounding line or worked steps.
inline void finish_plain(QaSample& q) {
  q.groundings.clear();
  finish(q);
}

}  // namespace detail

inline std::optional<QaSample> gen_object_count(const SceneMetadata& s, Rng& rng,
                                                const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  std::vector<std::string> eligible;
  const auto cats = s.by_category();
  for (const auto& [cat, objs] : cats) {
    if (objs.size() >= 2) eligible.push_back(cat);
  }
  if (eligible.empty()) return std::nullopt;
  const std::string cat = eligible[uniform_index(rng, eligible.size())];
  QaSample q = detail::start_sample(s, TaskKind::kObjectCount);
  q.answer = std::to_string(cats.at(cat).size());
  q.question = tc.fill("object_count.question", {{"category", cat}});
  q.analysis = tc.fill("object_count.analysis", {{"category", cat}});
  q.steps = tc.fill("object_count.conclusion", {{"category", cat}, {"answer", q.answer}});
  detail::finish_plain(q);
  return q;
}

inline std::optional<QaSample> gen_abs_distance(const SceneMetadata& s, Rng& rng,
                                                const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  const auto singles = s.singletons();
  if (singles.size() < 2) return std::nullopt;
  const auto pair = detail::pick(singles, 2, rng);
  const ObjectRecord& a = *pair[0];
  const ObjectRecord& b = *pair[1];
  const Vec3 ca = a.box.center(), cb = b.box.center();
  const Vec3 d = cb - ca;
  const double dist = d.norm();

  QaSample q = detail::start_sample(s, TaskKind::kAbsDistance);
  q.answer = format_fixed(dist, 1);
  const std::vector<std::pair<std::string, std::string>> vars{{"object_a", a.category}, {"object_b", b.category}};
  q.question = tc.fill("abs_distance.question", vars);
  q.analysis = tc.fill("abs_distance.analysis", vars);
  q.groundings = detail::group_groundings({&a, &b});
  q.steps = "To compute the distance, I find both centroids and take the Euclidean norm of their difference.\n"
            "Step 1: Centroid of the " + a.category + "\n" + detail::centroid_lines(a.box) + "\n" +
            "Step 2: Centroid of the " + b.category + "\n" + detail::centroid_lines(b.box) + "\n" +
            "Step 3: Distance\n" +
            "- d = sqrt(" + detail::fmt3(d.x()) + "^2 + " + detail::fmt3(d.y()) + "^2 + " + detail::fmt3(d.z()) +
            "^2) = " + detail::fmt3(dist) + "\n\n" +
            "The distance between the centers of the " + a.category + " and the " + b.category + " is about " +
            q.answer + " meters.";
  detail::finish(q);
  return q;
}

inline std::optional<QaSample> gen_object_size(const SceneMetadata& s, Rng& rng,
                                               const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  const auto singles = s.singletons();
  if (singles.empty()) return std::nullopt;
  const ObjectRecord& o = *singles[uniform_index(rng, singles.size())];
  const Vec3 e = o.box.extent();
  const double diag = e.norm();

  QaSample q = detail::start_sample(s, TaskKind::kObjectSize);
  q.answer = format_fixed(diag * 100.0, 0);
  q.question = tc.fill("object_size.question", {{"object", o.category}});
  q.analysis = tc.fill("object_size.analysis", {{"object", o.category}});
  q.groundings = detail::group_groundings({&o});
  q.steps = "The size of the " + o.category + " is the diagonal of its bounding box.\n"
            "Step 1: Box extents\n"
            "- dx = " + format_coord(o.box.max.x()) + " - " + format_coord(o.box.min.x()) + " = " + detail::fmt3(e.x()) + "\n" +
            "- dy = " + format_coord(o.box.max.y()) + " - " + format_coord(o.box.min.y()) + " = " + detail::fmt3(e.y()) + "\n" +
            "- dz = " + format_coord(o.box.max.z()) + " - " + format_coord(o.box.min.z()) + " = " + detail::fmt3(e.z()) + "\n" +
            "Step 2: Diagonal\n" +
            "- sqrt(dx^2 + dy^2 + dz^2) = " + detail::fmt3(diag) + " m\n\n" +
            "The " + o.category + " measures about " + q.answer + " centimeters along its diagonal.";
  detail::finish(q);
  return q;
}

inline std::optional<QaSample> gen_room_size(const SceneMetadata& s,
                                             const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  if (!s.room_area) return std::nullopt;
  QaSample q = detail::start_sample(s, TaskKind::kRoomSize);
  q.answer = format_fixed(*s.room_area, 1);
  q.question = tc.get("room_size.question");
  q.analysis = tc.get("room_size.analysis");
  q.steps = tc.fill("room_size.conclusion", {{"answer", q.answer}});
  detail::finish_plain(q);
  return q;
}

inline std::optional<QaSample> gen_rel_distance(const SceneMetadata& s, Rng& rng,
                                                const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  const auto singles = s.singletons();
  if (singles.size() < 3) return std::nullopt;
  const std::size_t max_n = std::min<std::size_t>(5, singles.size());
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    const std::size_t n = 3 + uniform_index(rng, max_n - 2);
    const auto chosen = detail::pick(singles, n, rng);
    const ObjectRecord& anchor = *chosen[0];
    std::vector<const ObjectRecord*> cands(chosen.begin() + 1, chosen.end());
    std::vector<double> dist;
    for (const auto* c : cands) dist.push_back((c->box.center() - anchor.box.center()).norm());
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    if (dist[order[1]] - dist[order[0]] <= 1e-6) continue;
    const std::size_t best = order[0];

    QaSample q = detail::start_sample(s, TaskKind::kRelDistance);
    std::vector<std::string> names;
    for (const auto* c : cands) names.push_back(c->category);
    q.options = detail::lettered(names);
    q.answer = option_letter(best);
    const std::vector<std::pair<std::string, std::string>> vars{{"anchor", anchor.category},
                                                                {"choices", detail::join(names, ", ")}};
    q.question = detail::with_options(tc.fill("rel_distance.question", vars), q.options);
    q.analysis = tc.fill("rel_distance.analysis", vars);
    q.groundings = detail::group_groundings(chosen);
    const Vec3 ca = anchor.box.center();
    q.steps = "I compare the distances from the " + anchor.category + "'s centroid (" + detail::fmt3(ca.x()) +
              ", " + detail::fmt3(ca.y()) + ", " + detail::fmt3(ca.z()) + ") to the centroid of each option:\n";
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const Vec3 c = cands[i]->box.center();
      q.steps += "- " + option_letter(i) + ". " + names[i] + " at (" + detail::fmt3(c.x()) + ", " +
                 detail::fmt3(c.y()) + ", " + detail::fmt3(c.z()) + "): distance " + detail::fmt3(dist[i]) + "\n";
    }
    q.steps += "\nThe " + names[best] + " is the closest to the " + anchor.category + ". Option " + q.answer +
               " is correct.";
    detail::finish(q);
    return q;
  }
  return std::nullopt;
}

inline std::optional<QaSample> gen_rel_direction(const SceneMetadata& s, Rng& rng,
                                                 const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  const auto singles = s.singletons();
  if (singles.size() < 3) return std::nullopt;
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    const auto chosen = detail::pick(singles, 3, rng);
    const ObjectRecord& obs = *chosen[0];
    const ObjectRecord& fac = *chosen[1];
    const ObjectRecord& tgt = *chosen[2];
    Direction dir;
    try {
      dir = rel_direction(obs.box, fac.box, tgt.box);
    } catch (const AmbiguousDirection&) {
      continue;
    }
    QaSample q = detail::start_sample(s, TaskKind::kRelDirection);
    q.options = detail::lettered({"left", "right"});
    q.answer = dir == Direction::kLeft ? "A" : "B";
    const std::vector<std::pair<std::string, std::string>> vars{
        {"observer", obs.category}, {"facing", fac.category}, {"target", tgt.category}};
    q.question = detail::with_options(tc.fill("rel_direction.question", vars), q.options);
    q.analysis = tc.fill("rel_direction.analysis", vars);
    q.groundings = detail::group_groundings({&obs, &fac, &tgt});

    const Vec2 o = obs.box.center().head<2>();
    const Vec2 f = fac.box.center().head<2>() - o;
    const Vec2 t = tgt.box.center().head<2>() - o;
    const double cross = direction_cross(obs.box, fac.box, tgt.box);
    const std::string side = dir == Direction::kLeft ? "left" : "right";
    q.steps = "To determine the " + tgt.category + "'s position relative to the " + fac.category +
              ", I analyze spatial relationships through three steps:\n"
              "Step 1: Observer Position and Orientation\n"
              "Standing at the " + obs.category + "'s centroid:\n" + detail::centroid_lines_xy(obs.box) + "\n" +
              "Facing the " + fac.category + ", whose centroid:\n" + detail::centroid_lines_xy(fac.box) + "\n" +
              "Step 2: Target Position\n"
              "The " + tgt.category + "'s centroid:\n" + detail::centroid_lines_xy(tgt.box) + "\n" +
              "Step 3: Side Test\n"
              "- facing vector f = (" + detail::fmt3(f.x()) + ", " + detail::fmt3(f.y()) + ")\n" +
              "- target vector t = (" + detail::fmt3(t.x()) + ", " + detail::fmt3(t.y()) + ")\n" +
              "- f.x * t.y - f.y * t.x = " + detail::fmt3(cross) + (cross > 0 ? " > 0" : " < 0") + "\n\n" +
              "The " + tgt.category + " lies to the " + side + " of the " + fac.category + ". Option " + q.answer +
              " is correct.";
    detail::finish(q);
    return q;
  }
  return std::nullopt;
}

// Permutations of 0..n-1 that move every element.
inline std::vector<std::vector<int>> derangements(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    bool ok = true;
    for (int i = 0; i < n; ++i) ok = ok && p[i] != i;
    if (ok) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::optional<QaSample> gen_appearance_order(const SceneMetadata& s, Rng& rng,
                                                    const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  std::vector<const ObjectRecord*> eligible;
  std::set<int> frames;
  for (const auto* o : s.singletons()) {
    auto it = s.first_visible.find(o->id);
    if (it == s.first_visible.end()) continue;
    eligible.push_back(o);
    frames.insert(it->second);
  }
  if (eligible.size() < 4 || frames.size() < 4) return std::nullopt;
  for (int attempt = 0; attempt < kMaxResample; ++attempt) {
    auto chosen = detail::pick(eligible, 4, rng);
    std::set<int> f;
    for (const auto* o : chosen) f.insert(s.first_visible.at(o->id));
    if (f.size() < 4) continue;

    auto sorted = chosen;
    std::sort(sorted.begin(), sorted.end(),
              [&](auto* a, auto* b) { return s.first_visible.at(a->id) < s.first_visible.at(b->id); });
    std::vector<std::string> correct;
    for (const auto* o : sorted) correct.push_back(o->category);

    auto perms = derangements(4);
    const auto picked = detail::pick(perms, 3, rng);
    std::vector<std::vector<std::string>> opts{correct};
    for (const auto& p : picked) {
      std::vector<std::string> v;
      for (int i : p) v.push_back(correct[i]);
      opts.push_back(v);
    }
    std::vector<std::size_t> slot(opts.size());
    std::iota(slot.begin(), slot.end(), 0);
    detail::shuffle(slot, rng);
    std::vector<std::string> texts;
    std::size_t answer = 0;
    for (std::size_t i = 0; i < slot.size(); ++i) {
      texts.push_back(detail::join(opts[slot[i]], ", "));
      if (slot[i] == 0) answer = i;
    }

    std::vector<std::string> asked;
    for (const auto* o : chosen) asked.push_back(o->category);
    QaSample q = detail::start_sample(s, TaskKind::kAppearanceOrder);
    q.options = detail::lettered(texts);
    q.answer = option_letter(answer);
    q.question = detail::with_options(
        tc.fill("appearance_order.question", {{"choices", detail::join(asked, ", ")}}), q.options);
    q.analysis = tc.get("appearance_order.analysis");
    q.steps = tc.fill("appearance_order.conclusion", {{"order", detail::join(correct, ", ")}, {"answer", q.answer}});
    detail::finish_plain(q);
    return q;
  }
  return std::nullopt;
}

enum class Turn { kStraight, kLeft, kRight };

struct RouteStep {
  Vec3 anchor;
  double heading_change_deg = 0;  // counter-clockwise positive
  Turn turn = Turn::kStraight;
  const ObjectRecord* landmark = nullptr;
  double landmark_distance = 0;
};

inline const ObjectRecord* nearest_object(const std::vector<ObjectRecord>& objs, const Vec3& p, double* dist) {
  const ObjectRecord* best = nullptr;
  double bd = INFINITY;
  for (const auto& o : objs) {
    const double d = o.box.distance_to(p);
    if (d < bd) {
      bd = d;
      best = &o;
    }
  }
  if (dist) *dist = bd;
  return best;
}

// Turn classification at every interior anchor. Consecutive anchors that
// coincide in xy are dropped so no turn is computed from a zero-length leg.
inline std::vector<RouteStep> route_steps(const std::vector<Vec3>& anchors, const std::vector<ObjectRecord>& objs,
                                          double straight_thresh_deg = kStraightThresholdDeg) {
  std::vector<Vec3> pts;
  for (const auto& a : anchors) {
    if (pts.empty() || (a.head<2>() - pts.back().head<2>()).norm() > 1e-9) pts.push_back(a);
  }
  std::vector<RouteStep> steps;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec2 d1 = (pts[i] - pts[i - 1]).head<2>();
    const Vec2 d2 = (pts[i + 1] - pts[i]).head<2>();
    RouteStep st;
    st.anchor = pts[i];
    st.heading_change_deg =
        std::atan2(d1.x() * d2.y() - d1.y() * d2.x(), d1.dot(d2)) * 180.0 / 3.14159265358979323846;
    if (std::abs(st.heading_change_deg) < straight_thresh_deg) {
      st.turn = Turn::kStraight;
    } else {
      st.turn = st.heading_change_deg > 0 ? Turn::kLeft : Turn::kRight;
    }
    st.landmark = nearest_object(objs, pts[i], &st.landmark_distance);
    steps.push_back(st);
  }
  return steps;
}

inline std::string turn_phrase(Turn t, const std::string& landmark) {
  switch (t) {
    case Turn::kLeft: return "turn left at the " + landmark;
    case Turn::kRight: return "turn right at the " + landmark;
    case Turn::kStraight: return "go straight past the " + landmark;
  }
  return {};
}

inline std::optional<QaSample> gen_route_plan(const SceneMetadata& s, const Trajectory& traj, Rng& rng,
                                              double straight_thresh_deg = kStraightThresholdDeg,
                                              const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  if (traj.anchors.size() < 3 || s.objects.empty()) return std::nullopt;
  const auto steps = route_steps(traj.anchors, s.objects, straight_thresh_deg);
  if (steps.empty()) return std::nullopt;
  const ObjectRecord* start = nearest_object(s.objects, traj.anchors.front(), nullptr);
  const ObjectRecord* goal = nearest_object(s.objects, traj.anchors.back(), nullptr);

  std::vector<Turn> turns;
  for (const auto& st : steps) turns.push_back(st.turn);
  auto phrase = [&](const std::vector<Turn>& ts) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < ts.size(); ++i) parts.push_back(turn_phrase(ts[i], steps[i].landmark->category));
    return detail::join(parts, ", ");
  };

  // Alternatives: every other assignment of turns, sampled without replacement.
  std::vector<std::vector<Turn>> alts;
  const std::size_t m = std::min<std::size_t>(turns.size(), 6);
  std::size_t combos = 1;
  for (std::size_t i = 0; i < m; ++i) combos *= 3;
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<Turn> v = turns;
    std::size_t x = c;
    for (std::size_t i = 0; i < m; ++i, x /= 3) v[i] = static_cast<Turn>(x % 3);
    if (v != turns) alts.push_back(v);
  }
  const auto picked = detail::pick(alts, std::min<std::size_t>(3, alts.size()), rng);
  std::vector<std::string> opts{phrase(turns)};
  for (const auto& a : picked) opts.push_back(phrase(a));
  std::vector<std::size_t> slot(opts.size());
  std::iota(slot.begin(), slot.end(), 0);
  detail::shuffle(slot, rng);
  std::vector<std::string> texts;
  std::size_t answer = 0;
  for (std::size_t i = 0; i < slot.size(); ++i) {
    texts.push_back(opts[slot[i]]);
    if (slot[i] == 0) answer = i;
  }

  QaSample q = detail::start_sample(s, TaskKind::kRoutePlan);
  q.options = detail::lettered(texts);
  q.answer = option_letter(answer);
  const std::vector<std::pair<std::string, std::string>> vars{{"start", start->category},
                                                              {"goal", goal->category}};
  q.question = detail::with_options(tc.fill("route_plan.question", vars), q.options);
  q.analysis = tc.fill("route_plan.analysis", vars);
  std::vector<const ObjectRecord*> marks{start};
  for (const auto& st : steps) marks.push_back(st.landmark);
  marks.push_back(goal);
  q.groundings = detail::group_groundings(marks);
  q.steps = "I follow the route anchor by anchor and measure the heading change at each one.\n";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& st = steps[i];
    q.steps += "Step " + std::to_string(i + 1) + ": at (" + detail::fmt3(st.anchor.x()) + ", " +
               detail::fmt3(st.anchor.y()) + ") the heading changes by " + format_fixed(st.heading_change_deg, 1) +
               " degrees, nearest object " + st.landmark->category + " (" + detail::fmt3(st.landmark_distance) +
               " m): " + turn_phrase(st.turn, st.landmark->category) + "\n";
  }
  q.steps += "\nThe route is: " + phrase(turns) + ". Option " + q.answer + " is correct.";
  detail::finish(q);
  return q;
}

}  // namespace gsr
