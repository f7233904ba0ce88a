#include "etho/perception/live.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include "etho/error.hpp"
#include "etho/perception/render.hpp"
#include "etho/util/text.hpp"

namespace etho::perception {

using nlohmann::json;

void LiveConfig::validate() const {
  if (cassette_mode != CassetteMode::kReplay) {
    if (endpoint.empty()) throw ConfigError("client.endpoint is required for live calls");
    if (model.empty()) throw ConfigError("client.model is required for live calls");
  }
  if (cassette_mode != CassetteMode::kOff && cassette_path.empty()) {
    throw ConfigError("client.cassette.path is required when recording or replaying");
  }
  if (timeout_s <= 0) throw ConfigError("client.timeout_s must be > 0");
  if (transport_retries < 0) throw ConfigError("client.transport_retries must be >= 0");
  if (max_concurrency < 1) throw ConfigError("client.max_concurrency must be >= 1");
  if (requests_per_second < 0.0) throw ConfigError("client.requests_per_second must be >= 0");
  if (burst < 1) throw ConfigError("client.burst must be >= 1");
}

LiveConfig parse_live_config(const json& obj) {
  static const std::set<std::string> kKeys = {"kind", "endpoint", "model", "auth_env", "temperature",
                                              "timeout_s", "transport_retries", "backoff_ms",
                                              "max_concurrency", "requests_per_second", "burst",
                                              "cassette", "corruption", "max_retries"};
  for (const auto& [k, v] : obj.items()) {
    if (!kKeys.contains(k)) throw ConfigError("client: unknown key '" + k + "'");
  }
  LiveConfig c;
  c.endpoint = obj.value("endpoint", c.endpoint);
  c.model = obj.value("model", c.model);
  c.auth_env = obj.value("auth_env", c.auth_env);
  c.temperature = obj.value("temperature", c.temperature);
  c.timeout_s = obj.value("timeout_s", c.timeout_s);
  c.transport_retries = obj.value("transport_retries", c.transport_retries);
  c.backoff_ms = obj.value("backoff_ms", c.backoff_ms);
  c.max_concurrency = obj.value("max_concurrency", c.max_concurrency);
  c.requests_per_second = obj.value("requests_per_second", c.requests_per_second);
  c.burst = obj.value("burst", c.burst);
  if (obj.contains("cassette")) {
    const auto& cs = obj["cassette"];
    for (const auto& [k, v] : cs.items()) {
      if (k != "mode" && k != "path") throw ConfigError("client.cassette: unknown key '" + k + "'");
    }
    const auto mode = cs.value("mode", std::string("off"));
    if (mode == "off") {
      c.cassette_mode = LiveConfig::CassetteMode::kOff;
    } else if (mode == "record") {
      c.cassette_mode = LiveConfig::CassetteMode::kRecord;
    } else if (mode == "replay") {
      c.cassette_mode = LiveConfig::CassetteMode::kReplay;
    } else {
      throw ConfigError("client.cassette.mode must be off, record or replay");
    }
    c.cassette_path = cs.value("path", std::string());
  }
  c.validate();
  return c;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned char b : digest) {
    out += kHex[b >> 4];
    out += kHex[b & 0xF];
  }
  return out;
}

std::string base64_encode(std::string_view data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(data.data()),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Cassette::Cassette(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (util::trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("key") || !j.contains("reply")) {
      throw IoError("cassette '" + path_.string() + "': malformed line");
    }
    entries_[j["key"].get<std::string>()] = j["reply"].get<std::string>();
  }
}

std::optional<std::string> Cassette::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Cassette::append(const std::string& key, std::string_view task, const std::string& reply) {
  std::lock_guard lock(mu_);
  if (entries_.contains(key)) return;
  entries_[key] = reply;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to cassette '" + path_.string() + "'");
  out << json{{"key", key}, {"task", task}, {"reply", reply}}.dump() << "\n";
}

json build_chat_body(const PerceptionRequest& request, const LiveConfig& config) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  for (const auto& a : request.attachments) {
    if (!a.caption.empty()) content.push_back({{"type", "text"}, {"text", a.caption}});
    const auto img = render_attachment(a);
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:" + img.mime + ";base64," + base64_encode(img.bytes)}}}});
  }
  return {{"model", config.model},
          {"temperature", config.temperature},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

HttpTransport::HttpTransport(LiveConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.cassette_mode != LiveConfig::CassetteMode::kOff) {
    cassette_ = std::make_unique<Cassette>(config_.cassette_path);
  }
  tokens_ = config_.burst;
  last_refill_ = std::chrono::steady_clock::now();
}

HttpTransport::~HttpTransport() = default;

void HttpTransport::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
  ++in_flight_;
  if (config_.requests_per_second <= 0.0) return;
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(now - last_refill_).count();
    last_refill_ = now;
    tokens_ = std::min<double>(config_.burst, tokens_ + dt * config_.requests_per_second);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / config_.requests_per_second;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    lock.lock();
  }
}

void HttpTransport::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

std::string HttpTransport::post(const std::string& body) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("client.endpoint must include a scheme");
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  const std::string host = config_.endpoint.substr(0, path_start);
  std::string base = path_start == std::string::npos ? "" : config_.endpoint.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();

  httplib::Client cli(host);
  cli.set_connection_timeout(config_.timeout_s, 0);
  cli.set_read_timeout(config_.timeout_s, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
    auto res = cli.Post(base + "/chat/completions", headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw ClientUnavailable("HTTP " + std::to_string(res->status), res->body);
    auto envelope = json::parse(res->body, nullptr, false);
    if (envelope.is_discarded() || !envelope.contains("choices") || envelope["choices"].empty()) {
      throw ClientUnavailable("malformed completion envelope", res->body);
    }
    const auto& msg = envelope["choices"][0].value("message", json::object());
    if (!msg.contains("content") || !msg["content"].is_string()) {
      throw ClientUnavailable("completion without text content", res->body);
    }
    return msg["content"].get<std::string>();
  }
  throw ClientUnavailable("endpoint unreachable after retries: " + last_error);
}

std::string HttpTransport::complete(const PerceptionRequest& request) {
  const std::string body = build_chat_body(request, config_).dump();
  const std::string key = sha256_hex(body);
  if (cassette_) {
    if (auto hit = cassette_->find(key)) return *hit;
    if (config_.cassette_mode == LiveConfig::CassetteMode::kReplay) {
      throw ClientUnavailable("cassette miss for " + std::string(name_of(request.task)) + " request " + key);
    }
  }
  acquire();
  std::string reply;
  try {
    reply = post(body);
  } catch (...) {
    release();
    throw;
  }
  release();
  if (cassette_) cassette_->append(key, name_of(request.task), reply);
  return reply;
}

}  // namespace etho::perception
