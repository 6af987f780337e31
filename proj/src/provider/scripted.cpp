#include "mirage/provider/scripted.hpp"

#include <chrono>
#include <regex>

#include "mirage/core/errors.hpp"
#include "mirage/core/text.hpp"

namespace mirage::provider {

PromptMatcher contains(std::vector<std::string> needles) {
  return [needles = std::move(needles)](std::string_view prompt) {
    for (const auto& n : needles) {
      if (prompt.find(n) == std::string_view::npos) return false;
    }
    return true;
  };
}

PromptMatcher contains(std::string needle) {
  return contains(std::vector<std::string>{std::move(needle)});
}

PromptMatcher matches_regex(const std::string& pattern) {
  auto re = std::make_shared<const std::regex>(pattern, std::regex::ECMAScript);
  return [re](std::string_view prompt) {
    return std::regex_search(prompt.begin(), prompt.end(), *re);
  };
}

PromptMatcher any_prompt() {
  return [](std::string_view) { return true; };
}

ScriptedProvider::Handle ScriptedProvider::register_script(PromptMatcher matcher, std::string response) {
  return register_script(std::move(matcher),
                         ResponseFn([r = std::move(response)](std::string_view) { return r; }));
}

ScriptedProvider::Handle ScriptedProvider::register_script(PromptMatcher matcher, ResponseFn response) {
  std::lock_guard lock(mu_);
  rules_.push_back({std::move(matcher), std::move(response), {}, 0, true});
  return rules_.size() - 1;
}

ScriptedProvider::Handle ScriptedProvider::register_sequence(PromptMatcher matcher,
                                                             std::vector<std::string> responses) {
  if (responses.empty()) throw PreconditionError("register_sequence needs at least one response");
  std::lock_guard lock(mu_);
  rules_.push_back({std::move(matcher), nullptr, std::move(responses), 0, true});
  return rules_.size() - 1;
}

void ScriptedProvider::unregister(Handle h) {
  std::lock_guard lock(mu_);
  if (h < rules_.size()) rules_[h].active = false;
}

Completion ScriptedProvider::complete(std::string_view prompt, const ProviderConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  std::lock_guard lock(mu_);
  ++calls_;
  for (auto& rule : rules_) {
    if (!rule.active || !rule.matcher(prompt)) continue;
    Completion c;
    if (rule.respond) {
      c.text = rule.respond(prompt);
    } else {
      c.text = rule.sequence[std::min(rule.cursor, rule.sequence.size() - 1)];
      ++rule.cursor;
    }
    c.model_name = cfg.model_name;
    c.attempt_count = 1;
    c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    return c;
  }
  auto head = collapse_whitespace(utf8_prefix(prompt, 160));
  throw ScriptMiss("no scripted rule for prompt: \"" + head + (prompt.size() > 160 ? "...\"" : "\""));
}

std::size_t ScriptedProvider::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const nlohmann::json& rules) {
  if (!rules.is_array()) throw SchemaError("script", "expected an array of rules");
  auto p = std::make_shared<ScriptedProvider>();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    const auto path = "script[" + std::to_string(i) + "]";
    if (!r.is_object()) throw SchemaError(path, "expected an object");

    std::vector<PromptMatcher> parts;
    if (r.contains("contains")) {
      const auto& c = r["contains"];
      if (c.is_string()) {
        parts.push_back(contains(c.get<std::string>()));
      } else if (c.is_array()) {
        parts.push_back(contains(c.get<std::vector<std::string>>()));
      } else {
        throw SchemaError(path + ".contains", "expected a string or array of strings");
      }
    }
    if (r.contains("regex")) parts.push_back(matches_regex(r["regex"].get<std::string>()));
    PromptMatcher matcher = parts.empty() ? any_prompt() : [parts](std::string_view prompt) {
      for (const auto& m : parts) {
        if (!m(prompt)) return false;
      }
      return true;
    };

    if (r.contains("responses")) {
      p->register_sequence(std::move(matcher), r["responses"].get<std::vector<std::string>>());
    } else if (r.contains("response")) {
      const auto& resp = r["response"];
      // Objects are accepted as a convenience and serialized compactly.
      p->register_script(std::move(matcher), resp.is_string() ? resp.get<std::string>() : resp.dump());
    } else {
      throw SchemaError(path, "rule needs 'response' or 'responses'");
    }
  }
  return p;
}

Completion RecordingProvider::complete(std::string_view prompt, const ProviderConfig& cfg) {
  {
    std::lock_guard lock(mu_);
    calls_.push_back({std::string(prompt), cfg});
  }
  return inner_->complete(prompt, cfg);
}

std::vector<RecordingProvider::Call> RecordingProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace mirage::provider
