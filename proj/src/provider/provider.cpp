#include "mirage/provider/provider.hpp"

#include "mirage/core/errors.hpp"

namespace mirage::provider {

ProviderConfig provider_config_from_json(const nlohmann::json& j) {
  ProviderConfig cfg;
  if (!j.is_object()) throw SchemaError("provider", "expected an object");
  cfg.model_name = j.value("model", j.value("model_name", std::string{}));
  cfg.temperature = j.value("temperature", cfg.temperature);
  cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
  cfg.endpoint = j.value("endpoint", cfg.endpoint);
  cfg.credential_env = j.value("credential_env", cfg.credential_env);
  cfg.retry_limit = j.value("retry_limit", cfg.retry_limit);
  if (j.contains("timeout_s")) {
    cfg.timeout = std::chrono::milliseconds(static_cast<long long>(j["timeout_s"].get<double>() * 1000.0));
  }
  if (cfg.model_name.empty()) throw SchemaError("provider.model", "missing model name");
  if (cfg.temperature < 0.0) throw SchemaError("provider.temperature", "must be >= 0");
  if (cfg.max_tokens <= 0) throw SchemaError("provider.max_tokens", "must be positive");
  if (cfg.retry_limit < 0) throw SchemaError("provider.retry_limit", "must be >= 0");
  return cfg;
}

nlohmann::json to_json(const ProviderConfig& cfg) {
  return {{"model", cfg.model_name},
          {"temperature", cfg.temperature},
          {"max_tokens", cfg.max_tokens},
          {"endpoint", cfg.endpoint},
          {"credential_env", cfg.credential_env},
          {"retry_limit", cfg.retry_limit},
          {"timeout_s", static_cast<double>(cfg.timeout.count()) / 1000.0}};
}

Completion LlmClient::complete(std::string_view prompt) const {
  if (!provider_) throw PreconditionError("LlmClient has no provider");
  if (prompt.empty()) throw PreconditionError("prompt must be non-empty");
  auto c = provider_->complete(prompt, cfg_);
  while (!c.text.empty() && (c.text.back() == ' ' || c.text.back() == '\n' || c.text.back() == '\t' ||
                             c.text.back() == '\r')) {
    c.text.pop_back();
  }
  if (c.model_name.empty()) c.model_name = cfg_.model_name;
  return c;
}

}  // namespace mirage::provider
