#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mirage/core/errors.hpp"

namespace mirage::provider {

struct ProviderConfig {
  std::string model_name;
  double temperature = 0.0;
  int max_tokens = 512;
  std::string endpoint;
  std::string credential_env = "WORKBENCH_API_KEY";
  int retry_limit = 3;
  std::chrono::milliseconds timeout{60'000};
};

/// Reads a ProviderConfig from a JSON object. Missing keys keep defaults;
/// `timeout_s` is in seconds.
ProviderConfig provider_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProviderConfig& cfg);

struct Completion {
  std::string text;
  std::string model_name;
  std::chrono::milliseconds latency{0};
  int attempt_count = 1;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Transport failed on every attempt.
class TransportError : public ProviderError {
 public:
  TransportError(const std::string& what, int attempts) : ProviderError(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// Credential missing or rejected by the service.
class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// Non-retryable service-side refusal.
class ProviderRefusal : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// The scripted provider had no rule for a prompt.
class ScriptMiss : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

/// A text-completion service. Implementations must be safe for concurrent
/// `complete` calls.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(std::string_view prompt, const ProviderConfig& cfg) = 0;
};

/// A provider bound to the configuration it should be called with. This is
/// what pipeline stages receive as "a model".
class LlmClient {
 public:
  LlmClient() = default;
  LlmClient(std::shared_ptr<Provider> provider, ProviderConfig cfg)
      : provider_(std::move(provider)), cfg_(std::move(cfg)) {}

  Completion complete(std::string_view prompt) const;

  const ProviderConfig& config() const noexcept { return cfg_; }
  const std::string& model_name() const noexcept { return cfg_.model_name; }
  bool valid() const noexcept { return provider_ != nullptr; }

 private:
  std::shared_ptr<Provider> provider_;
  ProviderConfig cfg_;
};

}  // namespace mirage::provider
