#include <httplib.h>

#include "mirage/provider/http_provider.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace mirage::provider {

std::chrono::milliseconds backoff_delay(int attempt, double unit) {
  const double base = 500.0 * std::pow(2.0, attempt);
  const double jitter = 0.8 + 0.4 * std::clamp(unit, 0.0, 1.0);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(base * jitter)));
}

nlohmann::json build_chat_request(std::string_view prompt, const ProviderConfig& cfg) {
  return {{"model", cfg.model_name},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
          {"temperature", cfg.temperature},
          {"max_tokens", cfg.max_tokens}};
}

std::string parse_chat_response(const nlohmann::json& body) {
  const auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty()) {
    throw ProviderRefusal("response has no choices");
  }
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content")) {
    throw ProviderRefusal("first choice has no message content");
  }
  const auto& content = first["message"]["content"];
  if (content.is_null()) return {};
  if (!content.is_string()) throw ProviderRefusal("message content is not a string");
  return content.get<std::string>();
}

HttpResult httplib_post(const std::string& url, const std::string& body, const std::string& bearer,
                        std::chrono::milliseconds timeout) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, {}, "malformed endpoint URL '" + url + "'"};
  const auto path_start = url.find('/', scheme_end + 3);
  const auto origin = url.substr(0, path_start);
  const auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);

  httplib::Client client(origin);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);

  auto res = client.Post(path, headers, body, "application/json");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

HttpProvider::HttpProvider(int max_in_flight, HttpPost post, Sleeper sleeper)
    : post_(std::move(post)),
      sleep_(sleeper ? std::move(sleeper)
                     : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(std::max(1, max_in_flight)),
      rng_(std::random_device{}()) {}

std::string HttpProvider::credential_for(const ProviderConfig& cfg) const {
  if (cfg.credential_env.empty()) return {};
  const char* value = std::getenv(cfg.credential_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw AuthError("credential environment variable '" + cfg.credential_env + "' is not set");
  }
  return value;
}

Completion HttpProvider::complete(std::string_view prompt, const ProviderConfig& cfg) {
  const auto bearer = credential_for(cfg);
  const auto body = build_chat_request(prompt, cfg).dump();
  const auto start = std::chrono::steady_clock::now();

  std::string last_error;
  const int attempts = cfg.retry_limit + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    HttpResult res;
    {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      res = post_(cfg.endpoint, body, bearer, cfg.timeout);
    }

    if (res.status >= 200 && res.status < 300) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(res.body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ProviderRefusal(std::string("unparseable response body: ") + e.what());
      }
      Completion c;
      c.text = parse_chat_response(parsed);
      c.model_name = parsed.value("model", cfg.model_name);
      c.attempt_count = attempt + 1;
      c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
      return c;
    }
    if (res.status == 401 || res.status == 403) {
      throw AuthError(fmt::format("endpoint rejected credential (HTTP {})", res.status));
    }
    const bool retryable = res.status == 0 || res.status == 408 || res.status == 429 || res.status >= 500;
    if (!retryable) {
      throw ProviderRefusal(fmt::format("HTTP {}: {}", res.status, res.body.substr(0, 300)));
    }
    last_error = res.status == 0 ? res.error : fmt::format("HTTP {}", res.status);
    if (attempt + 1 < attempts) {
      double unit = 0.5;
      {
        std::lock_guard lock(rng_mu_);
        unit = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
      }
      const auto delay = backoff_delay(attempt, unit);
      spdlog::warn("provider {}: attempt {} failed ({}), retrying in {} ms", cfg.model_name, attempt + 1,
                   last_error, delay.count());
      sleep_(delay);
    }
  }
  throw TransportError(fmt::format("{} failed after {} attempts: {}", cfg.model_name, attempts, last_error),
                       attempts);
}

}  // namespace mirage::provider
