#pragma once

#include <gsr/respond/ast.hpp>

#include <cstdio>
#include <string>

namespace gsr {

// Fixed 4-decimal meters; negative zero prints as 0.0000.
inline std::string format_coord(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

inline std::string emit_box(const Aabb& b) {
  std::string s = "<bbox>(";
  const double v[6] = {b.min.x(), b.min.y(), b.min.z(), b.max.x(), b.max.y(), b.max.z()};
  for (int i = 0; i < 6; ++i) {
    if (i) s += ", ";
    s += format_coord(v[i]);
  }
  return s + ")</bbox>";
}

inline std::string emit_grounding(const Grounding& g) {
  std::string s = g.name + " " + std::to_string(g.count);
  for (const auto& b : g.boxes) s += " " + emit_box(b);
  return s;
}

inline std::string emit_groundings(const std::vector<Grounding>& gs) {
  std::string s;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (i) s += ", ";
    s += emit_grounding(gs[i]);
  }
  return s;
}

// Canonical text of a response.
inline std::string emit_response(const ResponseAst& ast) {
  std::string s = "<think>" + ast.analysis;
  if (!ast.groundings.empty()) s += "\n\n" + emit_groundings(ast.groundings);
  if (!ast.reasoning.empty()) s += "\n\n" + ast.reasoning;
  return s + "</think>\n<answer>" + ast.answer + "</answer>";
}

}  // namespace gsr
