#pragma once

#include <gsr/core/error.hpp>
#include <gsr/eval/metrics.hpp>
#include <gsr/gcot/bev.hpp>
#include <gsr/gcot/png.hpp>
#include <gsr/gcot/qa.hpp>
#include <gsr/gcot/templates.hpp>
#include <gsr/respond/emit.hpp>
#include <gsr/respond/parse.hpp>

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace gsr {

// Network-level failure; the request may be retried.
class TransportError : public Error {
 public:
  using Error::Error;
};

struct CotRequest {
  std::string prompt;
  std::vector<std::uint8_t> png;  // BEV map
  const QaSample* sample = nullptr;
};

class CotBackend {
 public:
  virtual ~CotBackend() = default;
  // Returns the raw reply text. Throws TransportError on network failure.
  virtual std::string complete(const CotRequest& req) = 0;
};

// Offline backend: replies with the generator's worked steps and answer.
class MockCotBackend : public CotBackend {
 public:
  int fail_first = 0;         // transport failures before the first success
  bool wrong_answer = false;  // reply with an answer that disagrees
  int calls = 0;

  std::string complete(const CotRequest& req) override {
    ++calls;
    if (calls <= fail_first) throw TransportError("mock transport failure");
    if (!req.sample) throw InputError("mock backend needs the sample");
    std::string answer = req.sample->answer;
    if (wrong_answer) answer = "not-" + answer;
    return req.sample->steps + "\n<answer>" + answer + "</answer>";
  }
};

inline std::string build_cot_prompt(const QaSample& q, const std::map<std::string, Color>& key,
                                    const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  std::string objects;
  for (const auto& g : q.groundings) {
    auto it = key.find(g.name);
    objects += "- " + emit_grounding(g);
    if (it != key.end()) objects += " (color " + color_hex(it->second) + ")";
    objects += "\n";
  }
  if (objects.empty()) objects = "- none\n";
  return tc.fill("cot.prompt", {{"question", q.question}, {"answer", q.answer}, {"objects", objects}});
}

// Reasoning text of a reply, or nullopt when the reply has no <answer> block
// or its last answer disagrees with the expected one.
inline std::optional<std::string> validate_cot_reply(const std::string& reply, const std::string& expected) {
  const auto open = reply.rfind("<answer>");
  if (open == std::string::npos) return std::nullopt;
  const auto close = reply.find("</answer>", open);
  if (close == std::string::npos) return std::nullopt;
  const std::string answer = reply.substr(open + 8, close - open - 8);
  if (!exact_match(answer, expected)) return std::nullopt;
  std::string body = reply.substr(0, open);
  for (const char* tag : {"<think>", "</think>"}) {
    for (auto at = body.find(tag); at != std::string::npos; at = body.find(tag)) body.erase(at, std::string(tag).size());
  }
  const auto b = body.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return std::nullopt;
  body = body.substr(b, body.find_last_not_of(" \t\r\n") - b + 1);
  return body;
}

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_delay{500};
};

struct CotOutcome {
  CotStatus status = CotStatus::kNone;
  std::optional<std::string> reasoning;
  int attempts = 0;
  std::string error;
};

// Asks the backend for a reasoning path, retrying transport failures with
// exponential backoff. A reply that fails validation is not retried.
inline CotOutcome request_cot(CotBackend& backend, const BevImage* bev, const QaSample& q,
                              const RetryPolicy& retry = {}, const TemplateCatalog& tc = TemplateCatalog::builtin()) {
  CotRequest req;
  req.sample = &q;
  req.prompt = build_cot_prompt(q, bev ? bev->color_key : std::map<std::string, Color>{}, tc);
  if (bev) req.png = encode_png(bev->image);
  CotOutcome out;
  auto delay = retry.initial_delay;
  for (int i = 0; i < retry.attempts; ++i) {
    ++out.attempts;
    std::string reply;
    try {
      reply = backend.complete(req);
    } catch (const TransportError& e) {
      out.error = e.what();
      if (i + 1 < retry.attempts) {
        std::this_thread::sleep_for(delay);
        delay *= 2;
      }
      continue;
    }
    out.reasoning = validate_cot_reply(reply, q.answer);
    out.status = out.reasoning ? CotStatus::kOk : CotStatus::kRejected;
    if (!out.reasoning) out.error = "reply does not end with the expected <answer>";
    return out;
  }
  out.status = CotStatus::kFailed;
  return out;
}

// Stores the outcome on the sample: the cot field and the final response.
inline void apply_cot(QaSample& q, const CotOutcome& outcome) {
  q.cot_status = outcome.status;
  if (outcome.status == CotStatus::kOk) {
    q.cot = q.groundings.empty() ? *outcome.reasoning : emit_groundings(q.groundings) + "\n\n" + *outcome.reasoning;
    q.response = emit_response({q.analysis, q.groundings, *outcome.reasoning, q.answer});
  } else {
    q.cot.reset();
    q.response = emit_response({q.analysis, {}, "", q.answer});
  }
}

}  // namespace gsr
