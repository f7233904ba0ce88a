#pragma once

#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "etho/perception/request.hpp"

namespace etho::perception {

// Produces one raw model reply per request. Implementations throw
// ClientUnavailable on transport failure and must be safe to call from
// several threads.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string complete(const PerceptionRequest& request) = 0;
};

struct ClientStats {
  long long calls = 0;
  long long attempts = 0;
  long long schema_failures = 0;  // calls that exhausted their retries
};

// Validating front end over a Transport. A reply that does not parse or
// violates its schema is re-requested with the violation appended to the
// prompt, up to request.max_retries extra attempts.
class PerceptionClient {
 public:
  explicit PerceptionClient(std::shared_ptr<Transport> transport);

  // Throws ClientSchemaError (retries exhausted) or ClientUnavailable.
  PerceptionResponse call(const PerceptionRequest& request) const;

  ClientStats stats() const;

 private:
  std::shared_ptr<Transport> transport_;
  mutable std::atomic<long long> calls_{0};
  mutable std::atomic<long long> attempts_{0};
  mutable std::atomic<long long> schema_failures_{0};
};

// Replays canned replies in order, repeating the last one once exhausted.
// The literal reply "!unavailable" raises ClientUnavailable instead.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::vector<std::string> replies);
  std::string complete(const PerceptionRequest& request) override;

  std::vector<PerceptionRequest> seen() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::vector<PerceptionRequest> seen_;
};

// Always fails with ClientUnavailable.
class UnavailableTransport : public Transport {
 public:
  std::string complete(const PerceptionRequest& request) override;
};

}  // namespace etho::perception
