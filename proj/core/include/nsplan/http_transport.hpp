#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

namespace nsplan {

struct RetryPolicy {
  /// Additional attempts after the first one.
  int max_retries = 3;
  std::chrono::milliseconds base_delay{200};
  std::chrono::milliseconds max_delay{4000};
};

struct HttpOptions {
  std::string url;  // full URL, e.g. http://localhost:8000/v1/completions
  std::string api_key;  // sent as a bearer token when nonempty
  RetryPolicy retry;
  std::chrono::seconds timeout{60};
  std::size_t max_in_flight = 4;
};

/// Name of the environment variable that supplies the bearer token.
inline constexpr const char* kApiKeyEnv = "NSPLAN_API_KEY";

/// Reads kApiKeyEnv; empty when unset.
std::string api_key_from_env();

/// POSTs JSON documents to one endpoint. Network errors, 429 and 5xx
/// responses are retried with jittered exponential backoff; everything else
/// fails immediately with TransportError. Safe to share across threads;
/// concurrent requests are capped at max_in_flight.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(HttpOptions options);
  ~JsonHttpClient();
  JsonHttpClient(const JsonHttpClient&) = delete;
  JsonHttpClient& operator=(const JsonHttpClient&) = delete;

  nlohmann::json post(const nlohmann::json& body) const;
  const std::string& url() const noexcept { return options_.url; }

 struct Endpoint;

 private:
  nlohmann::json post_once(const std::string& payload, int& status) const;

  HttpOptions options_;
  std::unique_ptr<Endpoint> endpoint_;
  mutable std::mutex mutex_;
  mutable std::condition_variable slot_free_;
  mutable std::size_t in_flight_ = 0;
};

}  // namespace nsplan
