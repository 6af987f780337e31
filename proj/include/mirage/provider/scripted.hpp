#pragma once

#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirage/provider/provider.hpp"

namespace mirage::provider {

using PromptMatcher = std::function<bool(std::string_view prompt)>;
using ResponseFn = std::function<std::string(std::string_view prompt)>;

/// Matches prompts containing every one of `needles`.
PromptMatcher contains(std::vector<std::string> needles);
PromptMatcher contains(std::string needle);
PromptMatcher matches_regex(const std::string& pattern);
PromptMatcher any_prompt();

/// Deterministic offline provider. Each call walks the registered rules in
/// registration order and answers with the first rule whose matcher accepts
/// the prompt. Unmatched prompts raise ScriptMiss.
class ScriptedProvider : public Provider {
 public:
  using Handle = std::size_t;

  Handle register_script(PromptMatcher matcher, std::string response);
  Handle register_script(PromptMatcher matcher, ResponseFn response);
  /// Replies with `responses` in turn on successive matches, then repeats the
  /// last one.
  Handle register_sequence(PromptMatcher matcher, std::vector<std::string> responses);

  /// Disables a rule; later calls skip it.
  void unregister(Handle h);

  Completion complete(std::string_view prompt, const ProviderConfig& cfg) override;

  std::size_t call_count() const;

  /// Builds a provider from a rule list:
  ///   [{"contains": "x" | ["x","y"], "regex": "...", "response": "..." |
  ///     "responses": ["...", ...]}, ...]
  /// A rule with neither `contains` nor `regex` matches every prompt.
  static std::shared_ptr<ScriptedProvider> from_json(const nlohmann::json& rules);

 private:
  struct Rule {
    PromptMatcher matcher;
    ResponseFn respond;
    std::vector<std::string> sequence;
    std::size_t cursor = 0;
    bool active = true;
  };

  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::size_t calls_ = 0;
};

/// Forwards to an inner provider and keeps every (prompt, config) pair.
class RecordingProvider : public Provider {
 public:
  struct Call {
    std::string prompt;
    ProviderConfig cfg;
  };

  explicit RecordingProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}

  Completion complete(std::string_view prompt, const ProviderConfig& cfg) override;

  std::vector<Call> calls() const;

 private:
  std::shared_ptr<Provider> inner_;
  mutable std::mutex mu_;
  std::vector<Call> calls_;
};

}  // namespace mirage::provider
