#include "nsplan/http_transport.hpp"

#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>

#include "nsplan/errors.hpp"

namespace nsplan {

struct JsonHttpClient::Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

namespace {

void split_url(const std::string& url, JsonHttpClient::Endpoint* out) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint", "URL needs a scheme: " + url);
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ConfigError("endpoint", "unsupported URL scheme: " + url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") throw ConfigError("endpoint", "built without TLS support: " + url);
#endif
  auto path_start = url.find('/', scheme_end + 3);
  out->base = path_start == std::string::npos ? url : url.substr(0, path_start);
  out->path = path_start == std::string::npos ? "/" : url.substr(path_start);
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

std::chrono::milliseconds backoff(const RetryPolicy& policy, int attempt) {
  thread_local std::mt19937 rng{std::random_device{}()};
  auto ceiling = policy.base_delay.count() << std::min(attempt, 16);
  ceiling = std::min<long long>(ceiling, policy.max_delay.count());
  if (ceiling <= 0) return std::chrono::milliseconds(0);
  std::uniform_int_distribution<long long> jitter(ceiling / 2, ceiling);
  return std::chrono::milliseconds(jitter(rng));
}

}  // namespace

std::string api_key_from_env() {
  const char* value = std::getenv(kApiKeyEnv);
  return value == nullptr ? std::string() : std::string(value);
}

JsonHttpClient::JsonHttpClient(HttpOptions options)
    : options_(std::move(options)), endpoint_(std::make_unique<Endpoint>()) {
  split_url(options_.url, endpoint_.get());
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

JsonHttpClient::~JsonHttpClient() = default;

nlohmann::json JsonHttpClient::post_once(const std::string& payload, int& status) const {
  httplib::Client client(endpoint_->base);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto response = client.Post(endpoint_->path, headers, payload, "application/json");
  if (!response) {
    status = 0;
    throw TransportError(options_.url, 0, "request failed: " + httplib::to_string(response.error()));
  }
  status = response->status;
  if (status < 200 || status >= 300) {
    throw TransportError(options_.url, status, "unexpected HTTP status; body: " + response->body.substr(0, 200));
  }
  try {
    return nlohmann::json::parse(response->body);
  } catch (const nlohmann::json::exception& e) {
    status = -1;  // protocol error, not retried
    throw TransportError(options_.url, response->status, std::string("response is not JSON: ") + e.what());
  }
}

nlohmann::json JsonHttpClient::post(const nlohmann::json& body) const {
  {
    std::unique_lock lock(mutex_);
    slot_free_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
  }
  struct Release {
    const JsonHttpClient* self;
    ~Release() {
      {
        std::lock_guard lock(self->mutex_);
        --self->in_flight_;
      }
      self->slot_free_.notify_one();
    }
  } release{this};

  const std::string payload = body.dump();
  for (int attempt = 0;; ++attempt) {
    int status = 0;
    try {
      return post_once(payload, status);
    } catch (const TransportError&) {
      if (!retryable(status) || attempt >= options_.retry.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff(options_.retry, attempt));
  }
}

}  // namespace nsplan
