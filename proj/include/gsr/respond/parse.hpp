#pragma once

#include <gsr/respond/ast.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsr {

enum class Severity { kWarning, kError };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::size_t offset = 0;  // byte offset into the parsed text
  std::string message;
};

struct ParseResult {
  std::optional<ResponseAst> ast;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return ast.has_value(); }
  std::size_t warnings() const {
    std::size_t n = 0;
    for (const auto& d : diagnostics) n += d.severity == Severity::kWarning;
    return n;
  }
};

namespace detail {

inline bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

struct ParseFailure {
  std::size_t offset;
  std::string message;
};

// Left-to-right scanner over the <think> body. Offsets are reported relative
// to the whole response.
class BodyParser {
 public:
  BodyParser(std::string_view body, std::size_t base) : s_(body), base_(base) {}

  // Returns the analysis/groundings/reasoning split of the body, or fails.
  std::optional<ParseFailure> run(ResponseAst& ast, std::vector<Diagnostic>& diags) {
    const std::size_t first_box = s_.find("<bbox>");
    if (first_box == std::string_view::npos) {
      const std::size_t split = s_.find("\n\n");
      if (split == std::string_view::npos) {
        ast.analysis = trim(s_);
      } else {
        ast.analysis = trim(s_.substr(0, split));
        ast.reasoning = trim(s_.substr(split + 2));
      }
      return std::nullopt;
    }
    const std::size_t nl = s_.rfind('\n', first_box);
    pos_ = nl == std::string_view::npos ? 0 : nl + 1;
    ast.analysis = trim(s_.substr(0, pos_));

    while (true) {
      const std::size_t entry_at = pos_;
      const std::size_t box_at = s_.find("<bbox>", pos_);
      const std::string_view head = trim(s_.substr(pos_, box_at - pos_));
      const std::size_t split = head.find_last_of(" \t\r\n");
      if (split == std::string_view::npos) {
        return fail(entry_at, "grounding entry needs NAME COUNT before <bbox>");
      }
      Grounding g;
      g.name = std::string(trim(head.substr(0, split)));
      const std::string_view count_tok = head.substr(split + 1);
      int count = 0;
      const auto res = std::from_chars(count_tok.data(), count_tok.data() + count_tok.size(), count);
      if (res.ec != std::errc() || res.ptr != count_tok.data() + count_tok.size() || count <= 0) {
        return fail(entry_at, "grounding count must be a positive integer, got '" + std::string(count_tok) + "'");
      }
      if (g.name.empty() || g.name.find('<') != std::string::npos) {
        return fail(entry_at, "malformed grounding name");
      }
      g.count = count;
      pos_ = box_at;

      bool next_entry = false;
      while (true) {
        if (auto err = parse_box(g)) return err;
        const std::size_t after = pos_;
        skip_ws();
        if (starts_with("<bbox>")) continue;
        if (starts_with(",")) {
          ++pos_;
          skip_ws();
          if (starts_with("<bbox>")) continue;
          const std::size_t nb = s_.find("<bbox>", pos_);
          if (nb != std::string_view::npos && s_.substr(pos_, nb - pos_).find('\n') == std::string_view::npos) {
            next_entry = true;
            break;
          }
        }
        pos_ = after;
        break;
      }
      if (g.count != static_cast<int>(g.boxes.size())) {
        diags.push_back({Severity::kWarning, base_ + entry_at,
                         "grounding '" + g.name + "' states count " + std::to_string(g.count) + " but lists " +
                             std::to_string(g.boxes.size()) + " box(es)"});
      }
      ast.groundings.push_back(std::move(g));
      if (!next_entry) break;
    }
    ast.reasoning = trim(s_.substr(pos_));
    return std::nullopt;
  }

 private:
  bool starts_with(std::string_view t) const { return s_.substr(pos_, t.size()) == t; }
  void skip_ws() {
    while (pos_ < s_.size() && is_ws(s_[pos_])) ++pos_;
  }
  std::optional<ParseFailure> fail(std::size_t at, std::string msg) const {
    return ParseFailure{base_ + at, std::move(msg)};
  }

  std::optional<ParseFailure> parse_box(Grounding& g) {
    const std::size_t open = pos_;
    pos_ += 6;  // "<bbox>"
    skip_ws();
    if (!starts_with("(")) return fail(pos_, "expected '(' after <bbox>");
    ++pos_;
    double v[6];
    int n = 0;
    while (true) {
      skip_ws();
      if (starts_with(")")) {
        ++pos_;
        break;
      }
      if (n > 0) {
        if (!starts_with(",")) return fail(pos_, "expected ',' or ')' in bbox tuple");
        ++pos_;
        skip_ws();
      }
      const std::size_t num_at = pos_;
      const char* first = s_.data() + pos_;
      const char* last = s_.data() + s_.size();
      if (first != last && *first == '+') ++first;
      double x = 0;
      const auto res = std::from_chars(first, last, x, std::chars_format::fixed | std::chars_format::scientific);
      if (res.ec != std::errc() || !std::isfinite(x)) return fail(num_at, "malformed number in bbox tuple");
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
      if (n == 6) return fail(open, "bbox tuple has more than 6 numbers");
      v[n++] = x;
    }
    if (n != 6) return fail(open, "bbox tuple has " + std::to_string(n) + " numbers, expected 6");
    skip_ws();
    if (!starts_with("</bbox>")) return fail(pos_, "expected </bbox>");
    pos_ += 7;
    g.boxes.push_back(Aabb::from_corners(Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])));
    return std::nullopt;
  }

  std::string_view s_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses `<think>BODY</think> <answer>TEXT</answer>` in one left-to-right
// pass. Whitespace between blocks is ignored; when several <answer> blocks
// follow, the last one wins. Boxes are normalized to min/max corners.
inline ParseResult parse_response(std::string_view text) {
  ParseResult out;
  auto error = [&](std::size_t at, std::string msg) {
    out.diagnostics.push_back({Severity::kError, at, std::move(msg)});
    return out;
  };
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && detail::is_ws(text[pos])) ++pos;
  };
  skip_ws();
  if (text.substr(pos, 7) != "<think>") return error(pos, "expected <think>");
  const std::size_t think_at = pos;
  pos += 7;
  const std::size_t close = text.find("</think>", pos);
  if (close == std::string_view::npos) return error(think_at, "unterminated <think> block");
  const std::size_t nested = text.substr(pos, close - pos).find("<think>");
  if (nested != std::string_view::npos) return error(pos + nested, "nested <think> block");

  ResponseAst ast;
  detail::BodyParser body(text.substr(pos, close - pos), pos);
  if (auto err = body.run(ast, out.diagnostics)) return error(err->offset, err->message);
  pos = close + 8;

  bool have_answer = false;
  while (true) {
    skip_ws();
    if (pos == text.size()) break;
    if (text.substr(pos, 8) != "<answer>") {
      return error(pos, have_answer ? "unexpected text after </answer>" : "expected <answer>");
    }
    const std::size_t open = pos;
    pos += 8;
    const std::size_t end = text.find("</answer>", pos);
    if (end == std::string_view::npos) return error(open, "unterminated <answer> block");
    ast.answer = std::string(detail::trim(text.substr(pos, end - pos)));
    have_answer = true;
    pos = end + 9;
  }
  if (!have_answer) return error(text.size(), "missing <answer> block");
  out.ast = std::move(ast);
  return out;
}

}  // namespace gsr
