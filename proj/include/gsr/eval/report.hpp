#pragma once

#include <gsr/eval/metrics.hpp>
#include <gsr/gcot/qa.hpp>
#include <gsr/respond/parse.hpp>

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gsr {

struct MeanAccumulator {
  double sum = 0;
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct EvalReport {
  MeanAccumulator acc25, acc50;  // per single-box grounding entry
  MeanAccumulator f1_25, f1_50;  // per sample with boxes
  MeanAccumulator exact;         // choice answers
  MeanAccumulator numeric;       // numeric answers
  std::map<std::string, MeanAccumulator> per_task;
  std::size_t samples = 0;
  std::size_t missing = 0;      // ground-truth samples without a prediction
  std::size_t parse_errors = 0; // predictions the response parser rejected
};

inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Scores predicted response texts (keyed by sample id) against ground truth.
inline EvalReport evaluate(const std::vector<QaSample>& gt, const std::map<std::string, std::string>& predictions) {
  EvalReport rep;
  for (const auto& q : gt) {
    ++rep.samples;
    ResponseAst pred;
    auto it = predictions.find(q.id);
    if (it == predictions.end()) {
      ++rep.missing;
    } else {
      auto parsed = parse_response(it->second);
      if (parsed.ok()) {
        pred = std::move(*parsed.ast);
      } else {
        ++rep.parse_errors;
      }
    }

    for (const auto& g : q.groundings) {
      if (g.boxes.size() != 1) continue;
      std::optional<Aabb> p;
      for (const auto& pg : pred.groundings) {
        if (pg.name == g.name && !pg.boxes.empty()) {
          p = pg.boxes.front();
          break;
        }
      }
      const std::optional<Aabb> preds[1] = {p};
      rep.acc25.add(acc_at(preds, g.boxes, kIouThreshold25));
      rep.acc50.add(acc_at(preds, g.boxes, kIouThreshold50));
    }
    std::vector<Aabb> gt_boxes, pred_boxes;
    for (const auto& g : q.groundings) gt_boxes.insert(gt_boxes.end(), g.boxes.begin(), g.boxes.end());
    for (const auto& g : pred.groundings) pred_boxes.insert(pred_boxes.end(), g.boxes.begin(), g.boxes.end());
    if (!gt_boxes.empty()) {
      rep.f1_25.add(f1_at(pred_boxes, gt_boxes, kIouThreshold25).f1);
      rep.f1_50.add(f1_at(pred_boxes, gt_boxes, kIouThreshold50).f1);
    }

    double score;
    const auto gt_num = task_is_numeric(q.task) ? parse_number(q.answer) : std::nullopt;
    if (gt_num && *gt_num > 0) {
      const auto p = parse_number(pred.answer);
      score = p ? numeric_score(*p, *gt_num) : 0.0;
      rep.numeric.add(score);
    } else {
      score = exact_match(pred.answer, q.answer);
      rep.exact.add(score);
    }
    rep.per_task[std::string(task_name(q.task))].add(score);
  }
  return rep;
}

inline nlohmann::json report_json(const EvalReport& r) {
  auto m = [](const MeanAccumulator& a) { return nlohmann::json{{"value", a.mean()}, {"count", a.count}}; };
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [name, acc] : r.per_task) tasks[name] = m(acc);
  return {{"samples", r.samples},        {"missing", r.missing}, {"parse_errors", r.parse_errors},
          {"acc@25", m(r.acc25)},        {"acc@50", m(r.acc50)}, {"f1@25", m(r.f1_25)},
          {"f1@50", m(r.f1_50)},         {"exact_match", m(r.exact)}, {"numeric_score", m(r.numeric)},
          {"tasks", tasks}};
}

inline std::string report_table(const EvalReport& r) {
  std::string s;
  char line[128];
  auto row = [&](const std::string& name, const MeanAccumulator& a) {
    std::snprintf(line, sizeof line, "%-18s %8.4f %8zu\n", name.c_str(), a.mean(), a.count);
    s += line;
  };
  std::snprintf(line, sizeof line, "%-18s %8s %8s\n", "metric", "value", "count");
  s += line;
  row("acc@25", r.acc25);
  row("acc@50", r.acc50);
  row("f1@25", r.f1_25);
  row("f1@50", r.f1_50);
  row("exact_match", r.exact);
  row("numeric_score", r.numeric);
  for (const auto& [name, acc] : r.per_task) row("  " + name, acc);
  std::snprintf(line, sizeof line, "samples %zu, missing predictions %zu, unparsable %zu\n", r.samples, r.missing,
                r.parse_errors);
  s += line;
  return s;
}

}  // namespace gsr
