#pragma once

// Chat-completions client for the reasoning-path backend. Kept apart from
// llm.hpp so only the translation units that talk to the network pull in
// the HTTP library.

#include <gsr/gcot/llm.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

namespace gsr {

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

struct HttpEndpoint {
  std::string base_url;  // scheme://host[:port]
  std::string api_key;
  std::string model = "gpt-4o";
  int max_in_flight = 4;
  int timeout_seconds = 120;
};

class HttpCotBackend : public CotBackend {
 public:
  explicit HttpCotBackend(HttpEndpoint ep) : ep_(std::move(ep)), slots_(std::clamp(ep_.max_in_flight, 1, 64)) {
    if (ep_.base_url.empty()) throw InputError("LLM endpoint URL is empty (set GST_LLM_URL)");
  }

  std::string complete(const CotRequest& req) override {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", req.prompt}});
    if (!req.png.empty()) {
      content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(req.png)}}}});
    }
    const nlohmann::json body{{"model", ep_.model},
                              {"temperature", 0},
                              {"messages", {{{"role", "user"}, {"content", content}}}}};

    slots_.acquire();
    struct Release {
      std::counting_semaphore<64>& s;
      ~Release() { s.release(); }
    } release{slots_};

    httplib::Client client(ep_.base_url);
    client.set_connection_timeout(ep_.timeout_seconds);
    client.set_read_timeout(ep_.timeout_seconds);
    httplib::Headers headers;
    if (!ep_.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep_.api_key);
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) throw TransportError("LLM request failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("LLM request returned HTTP " + std::to_string(res->status));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      // Malformed bodies are answered with empty text so validation rejects them.
      return {};
    }
  }

 private:
  HttpEndpoint ep_;
  std::counting_semaphore<64> slots_;
};

}  // namespace gsr
