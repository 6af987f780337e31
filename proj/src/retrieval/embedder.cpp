#include "mirage/retrieval/embedder.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "mirage/core/text.hpp"

namespace mirage::retrieval {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string passage_embedding_text(const Passage& p) { return p.title + "\n" + p.text; }

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  const auto n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

std::vector<float> l2_normalize(std::span<const float> v) {
  const double norm = std::sqrt(dot(v, v));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw PreconditionError("cannot normalize a zero or non-finite vector");
  }
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
  return out;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw PreconditionError("HashEmbedder dimension must be positive");
}

std::vector<float> HashEmbedder::embed(std::string_view text) const {
  std::vector<float> v(dim_, 0.0f);
  for (const auto& tok : normalized_tokens(text)) {
    const auto h = fnv1a(tok);
    const auto bucket = static_cast<std::size_t>(h % dim_);
    v[bucket] += (h >> 63) != 0 ? -1.0f : 1.0f;
  }
  bool all_zero = true;
  for (float x : v) {
    if (x != 0.0f) {
      all_zero = false;
      break;
    }
  }
  // Empty text (or perfectly cancelling tokens) falls back to a fixed axis.
  if (all_zero) v[0] = 1.0f;
  return l2_normalize(v);
}

RemoteEmbedder::RemoteEmbedder(provider::ProviderConfig cfg, provider::HttpPost post)
    : cfg_(std::move(cfg)), post_(std::move(post)) {}

std::vector<float> RemoteEmbedder::embed(std::string_view text) const {
  std::string bearer;
  if (!cfg_.credential_env.empty()) {
    const char* value = std::getenv(cfg_.credential_env.c_str());
    if (value == nullptr || *value == '\0') {
      throw provider::AuthError("credential environment variable '" + cfg_.credential_env + "' is not set");
    }
    bearer = value;
  }
  const nlohmann::json req = {{"model", cfg_.model_name}, {"input", std::string(text)}};
  const auto body = req.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.retry_limit; ++attempt) {
    const auto res = post_(cfg_.endpoint, body, bearer, cfg_.timeout);
    if (res.status >= 200 && res.status < 300) {
      try {
        const auto parsed = nlohmann::json::parse(res.body);
        return parsed.at("data").at(0).at("embedding").get<std::vector<float>>();
      } catch (const nlohmann::json::exception& e) {
        throw provider::ProviderRefusal(std::string("malformed embedding response: ") + e.what());
      }
    }
    if (res.status == 401 || res.status == 403) throw provider::AuthError("embedding endpoint rejected credential");
    const bool retryable = res.status == 0 || res.status == 408 || res.status == 429 || res.status >= 500;
    if (!retryable) throw provider::ProviderRefusal("embedding endpoint returned HTTP " + std::to_string(res.status));
    last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
    if (attempt < cfg_.retry_limit) std::this_thread::sleep_for(provider::backoff_delay(attempt, 0.5));
  }
  throw provider::TransportError("embedding request failed: " + last_error, cfg_.retry_limit + 1);
}

}  // namespace mirage::retrieval
