#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mirage/provider/provider.hpp"

namespace mirage::provider {

/// Delay before retry number `attempt` (0-based): 0.5 s * 2^attempt, jittered
/// by a uniform factor in [0.8, 1.2]. `unit` in [0, 1] selects the jitter.
std::chrono::milliseconds backoff_delay(int attempt, double unit);

/// Body of a chat-completion request carrying `prompt` as a single user
/// message.
nlohmann::json build_chat_request(std::string_view prompt, const ProviderConfig& cfg);

/// Text of the first choice's message content. Throws ProviderRefusal when the
/// body has no such field.
std::string parse_chat_response(const nlohmann::json& body);

/// Result of one raw HTTP exchange. `status` 0 means the request never got a
/// response (connection refused, timeout, ...).
struct HttpResult {
  int status = 0;
  std::string body;
  std::string error;
};

/// POSTs JSON to a URL. Swappable so tests can fake the network.
using HttpPost = std::function<HttpResult(const std::string& url, const std::string& body,
                                          const std::string& bearer,
                                          std::chrono::milliseconds timeout)>;

/// Default HttpPost built on cpp-httplib (http and https).
HttpResult httplib_post(const std::string& url, const std::string& body, const std::string& bearer,
                        std::chrono::milliseconds timeout);

/// Chat-completion gateway. Retries transport failures, 408, 429 and 5xx up to
/// `retry_limit` times with exponential backoff; 401/403 raise AuthError; any
/// other non-2xx raises ProviderRefusal. At most `max_in_flight` requests run
/// at once across all threads sharing the instance.
class HttpProvider : public Provider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpProvider(int max_in_flight = 4, HttpPost post = httplib_post,
                        Sleeper sleeper = nullptr);

  Completion complete(std::string_view prompt, const ProviderConfig& cfg) override;

 private:
  std::string credential_for(const ProviderConfig& cfg) const;

  HttpPost post_;
  Sleeper sleep_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

}  // namespace mirage::provider
