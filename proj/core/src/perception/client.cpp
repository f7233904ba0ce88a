#include "etho/perception/client.hpp"

#include <chrono>

#include "etho/error.hpp"
#include "etho/perception/schemas.hpp"

namespace etho::perception {

PerceptionClient::PerceptionClient(std::shared_ptr<Transport> transport)
    : transport_(std::move(transport)) {
  if (!transport_) throw ConfigError("perception client needs a transport");
}

PerceptionResponse PerceptionClient::call(const PerceptionRequest& request) const {
  request.validate();
  ++calls_;
  const auto start = std::chrono::steady_clock::now();
  PerceptionRequest attempt_req = request;
  std::string last_raw;
  std::string last_error;
  const int max_attempts = request.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    ++attempts_;
    last_raw = transport_->complete(attempt_req);
    auto parsed = extract_json(last_raw);
    if (!parsed) {
      last_error = "reply is not a JSON object";
    } else if (auto violation = validate_payload(request.schema_id, *parsed, request.context)) {
      last_error = *violation;
    } else {
      PerceptionResponse resp;
      resp.raw_text = last_raw;
      resp.payload = std::move(*parsed);
      resp.attempts = attempt;
      resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      return resp;
    }
    attempt_req.prompt = request.prompt + "\n\nYour previous reply was rejected: " + last_error +
                         ". Reply again with a single JSON object that follows the requested format.";
  }
  ++schema_failures_;
  throw ClientSchemaError(std::string(name_of(request.task)) + " reply invalid after " +
                              std::to_string(max_attempts) + " attempts: " + last_error,
                          last_raw, max_attempts);
}

ClientStats PerceptionClient::stats() const { return {calls_.load(), attempts_.load(), schema_failures_.load()}; }

ScriptedTransport::ScriptedTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {
  if (replies_.empty()) throw ConfigError("scripted transport needs at least one reply");
}

std::string ScriptedTransport::complete(const PerceptionRequest& request) {
  std::lock_guard lock(mu_);
  seen_.push_back(request);
  const auto& reply = replies_[std::min(next_, replies_.size() - 1)];
  ++next_;
  if (reply == "!unavailable") throw ClientUnavailable("scripted transport outage");
  return reply;
}

std::vector<PerceptionRequest> ScriptedTransport::seen() const {
  std::lock_guard lock(mu_);
  return seen_;
}

std::string UnavailableTransport::complete(const PerceptionRequest&) {
  throw ClientUnavailable("perception endpoint unavailable");
}

}  // namespace etho::perception
