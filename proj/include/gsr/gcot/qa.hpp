#pragma once

#include <gsr/core/error.hpp>
#include <gsr/respond/ast.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsr {

enum class TaskKind {
  kObjectCount,
  kAbsDistance,
  kObjectSize,
  kRoomSize,
  kRelDistance,
  kRelDirection,
  kAppearanceOrder,
  kRoutePlan,
};

inline constexpr std::array<TaskKind, 8> kAllTasks{
    TaskKind::kObjectCount,  TaskKind::kAbsDistance,  TaskKind::kObjectSize,      TaskKind::kRoomSize,
    TaskKind::kRelDistance, TaskKind::kRelDirection, TaskKind::kAppearanceOrder, TaskKind::kRoutePlan};

inline std::string_view task_name(TaskKind t) {
  switch (t) {
    case TaskKind::kObjectCount: return "object_count";
    case TaskKind::kAbsDistance: return "abs_distance";
    case TaskKind::kObjectSize: return "object_size";
    case TaskKind::kRoomSize: return "room_size";
    case TaskKind::kRelDistance: return "rel_distance";
    case TaskKind::kRelDirection: return "rel_direction";
    case TaskKind::kAppearanceOrder: return "appearance_order";
    case TaskKind::kRoutePlan: return "route_plan";
  }
  return "unknown";
}

inline TaskKind parse_task(std::string_view name) {
  for (TaskKind t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  throw InputError("unknown task '" + std::string(name) + "'");
}

// Tasks answered without a grounded reasoning chain.
inline bool task_has_cot(TaskKind t) {
  return t != TaskKind::kObjectCount && t != TaskKind::kRoomSize && t != TaskKind::kAppearanceOrder;
}

// Tasks whose answer is a number scored by relative accuracy.
inline bool task_is_numeric(TaskKind t) {
  return t == TaskKind::kObjectCount || t == TaskKind::kAbsDistance || t == TaskKind::kObjectSize ||
         t == TaskKind::kRoomSize;
}

enum class CotStatus { kNone, kOk, kFailed, kRejected };

inline std::string_view cot_status_name(CotStatus s) {
  switch (s) {
    case CotStatus::kNone: return "none";
    case CotStatus::kOk: return "ok";
    case CotStatus::kFailed: return "failed";
    case CotStatus::kRejected: return "rejected";
  }
  return "none";
}

inline CotStatus parse_cot_status(std::string_view s) {
  for (CotStatus c : {CotStatus::kNone, CotStatus::kOk, CotStatus::kFailed, CotStatus::kRejected}) {
    if (cot_status_name(c) == s) return c;
  }
  throw InputError("unknown cot_status '" + std::string(s) + "'");
}

struct QaSample {
  std::string id;
  std::string scene_id;
  TaskKind task = TaskKind::kObjectCount;
  std::string question;
  std::vector<std::string> options;  // "A. ..." entries for multiple choice
  std::string answer;                // option letter or number text
  std::vector<Grounding> groundings;
  std::optional<std::string> cot;
  CotStatus cot_status = CotStatus::kNone;
  std::string response;  // full <think>...</think><answer>...</answer> text

  // Generator-side material for assembling the response; not serialized.
  std::string analysis;
  std::string steps;
};

// Rounds half away from zero at `decimals` places of the decimal value.
inline double round_half_up(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double y = std::abs(x) * scale;
  const double r = std::floor(y + 0.5 + 1e-9 * std::max(1.0, y)) / scale;
  return std::copysign(r, x);
}

inline std::string format_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, round_half_up(x, decimals));
  std::string s(buf);
  if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

inline std::string option_letter(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

inline nlohmann::json grounding_json(const Grounding& g) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : g.boxes) boxes.push_back({b.min.x(), b.min.y(), b.min.z(), b.max.x(), b.max.y(), b.max.z()});
  return {{"name", g.name}, {"count", g.count}, {"boxes", boxes}};
}

inline Grounding grounding_from_json(const nlohmann::json& j) {
  Grounding g;
  g.name = j.at("name").get<std::string>();
  g.count = j.at("count").get<int>();
  for (const auto& b : j.at("boxes")) {
    if (!b.is_array() || b.size() != 6) throw InputError("grounding box must have 6 numbers");
    g.boxes.push_back(Aabb::from_corners(Vec3(b[0].get<double>(), b[1].get<double>(), b[2].get<double>()),
                                         Vec3(b[3].get<double>(), b[4].get<double>(), b[5].get<double>())));
  }
  return g;
}

inline nlohmann::json to_json(const QaSample& q) {
  nlohmann::json j;
  j["id"] = q.id;
  j["scene_id"] = q.scene_id;
  j["task"] = task_name(q.task);
  j["question"] = q.question;
  j["options"] = q.options;
  j["answer"] = q.answer;
  j["groundings"] = nlohmann::json::array();
  for (const auto& g : q.groundings) j["groundings"].push_back(grounding_json(g));
  j["cot"] = q.cot ? nlohmann::json(*q.cot) : nlohmann::json(nullptr);
  j["cot_status"] = cot_status_name(q.cot_status);
  j["response"] = q.response;
  return j;
}

inline QaSample qa_from_json(const nlohmann::json& j) {
  QaSample q;
  q.id = j.at("id").get<std::string>();
  q.scene_id = j.at("scene_id").get<std::string>();
  q.task = parse_task(j.at("task").get<std::string>());
  q.question = j.at("question").get<std::string>();
  q.options = j.value("options", std::vector<std::string>{});
  q.answer = j.at("answer").get<std::string>();
  for (const auto& g : j.value("groundings", nlohmann::json::array())) q.groundings.push_back(grounding_from_json(g));
  if (j.contains("cot") && !j["cot"].is_null()) q.cot = j["cot"].get<std::string>();
  q.cot_status = parse_cot_status(j.value("cot_status", "none"));
  q.response = j.value("response", "");
  return q;
}

}  // namespace gsr
