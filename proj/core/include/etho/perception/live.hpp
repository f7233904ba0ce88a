#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "etho/perception/client.hpp"

namespace etho::perception {

struct LiveConfig {
  std::string endpoint;                    // e.g. "http://127.0.0.1:8000/v1"
  std::string model;
  std::string auth_env = "ETHO_API_TOKEN";  // name of the env var holding the bearer token
  double temperature = 0.0;
  int timeout_s = 120;
  int transport_retries = 2;  // on connection errors, 429 and 5xx
  int backoff_ms = 500;
  int max_concurrency = 4;
  double requests_per_second = 0.0;  // 0 disables rate limiting
  int burst = 1;

  enum class CassetteMode { kOff, kRecord, kReplay };
  CassetteMode cassette_mode = CassetteMode::kOff;
  std::filesystem::path cassette_path;

  void validate() const;
};

LiveConfig parse_live_config(const nlohmann::json& obj);

// Request-hash -> raw reply store, one JSON object per line:
//   {"key": "<sha256 hex of the request body>", "task": "caption", "reply": "<raw text>"}
class Cassette {
 public:
  explicit Cassette(std::filesystem::path path);

  std::optional<std::string> find(const std::string& key) const;
  void append(const std::string& key, std::string_view task, const std::string& reply);

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> entries_;
};

// Chat-completion style HTTP body for a request; images are inlined as
// base64 data URLs after applying crops and overlays.
nlohmann::json build_chat_body(const PerceptionRequest& request, const LiveConfig& config);

std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);

// OpenAI-compatible chat completion endpoint with a concurrency cap,
// token-bucket rate limit and cassette record/replay.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(LiveConfig config);
  ~HttpTransport() override;

  std::string complete(const PerceptionRequest& request) override;

 private:
  std::string post(const std::string& body);
  void acquire();
  void release();

  LiveConfig config_;
  std::unique_ptr<Cassette> cassette_;
  std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  double tokens_ = 0.0;
  std::chrono::steady_clock::time_point last_refill_;
};

}  // namespace etho::perception
