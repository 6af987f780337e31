#include "mirage/actor/actor.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mirage/core/text.hpp"
#include "mirage/provider/structured.hpp"

namespace mirage::actor {

std::string_view to_string(AgentAction::Kind k) noexcept {
  switch (k) {
    case AgentAction::Kind::Search: return "search";
    case AgentAction::Kind::Planning: return "planning";
    case AgentAction::Kind::Answer: return "answer";
  }
  return "answer";
}

namespace {

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from = 0) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size() && match; ++j) {
      match = std::toupper(static_cast<unsigned char>(hay[i + j])) == std::toupper(static_cast<unsigned char>(needle[j]));
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

AgentAction make_action(std::string raw, std::string_view verb, std::string argument) {
  const auto name = to_lower_ascii(verb);
  if (name == "search") {
    if (trim(argument).empty()) throw ActionParseError(std::move(raw), "empty search query");
    return {AgentAction::Kind::Search, std::move(argument)};
  }
  if (name == "planning") return {AgentAction::Kind::Planning, std::move(argument)};
  if (name == "answer") {
    if (to_lower_ascii(trim(argument)) == "planning") return {AgentAction::Kind::Planning, std::move(argument)};
    if (trim(argument).empty()) throw ActionParseError(std::move(raw), "empty answer");
    return {AgentAction::Kind::Answer, std::move(argument)};
  }
  throw ActionParseError(std::move(raw), "unknown action '" + std::string(verb) + "'");
}

std::optional<ParsedAction> parse_line_format(std::string_view text, std::string& why) {
  const auto action_at = find_ci(text, "ACTION:");
  if (action_at == std::string_view::npos) {
    why = "no ACTION line";
    return std::nullopt;
  }
  ParsedAction out;
  const auto thought_at = find_ci(text, "THOUGHT:");
  if (thought_at != std::string_view::npos && thought_at < action_at) {
    out.thought = trim(text.substr(thought_at + 8, action_at - thought_at - 8));
  }
  std::size_t i = action_at + 7;
  while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  const auto verb_begin = i;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  const auto verb = text.substr(verb_begin, i - verb_begin);
  if (verb.empty()) {
    why = "ACTION without a verb";
    return std::nullopt;
  }
  while (i < text.size() && text[i] == ' ') ++i;
  if (i >= text.size() || text[i] != '[') {
    why = "ACTION verb without a bracket";
    return std::nullopt;
  }
  int depth = 0;
  const auto arg_begin = i + 1;
  for (; i < text.size(); ++i) {
    if (text[i] == '[') {
      ++depth;
    } else if (text[i] == ']' && --depth == 0) {
      out.action = make_action(std::string(text), verb, std::string(text.substr(arg_begin, i - arg_begin)));
      return out;
    }
  }
  why = "unbalanced brackets";
  return std::nullopt;
}

std::optional<ParsedAction> parse_payload_format(std::string_view text) {
  const auto payload = provider::try_extract_structured(text, {"action"});
  if (!payload || !(*payload)["action"].is_string()) return std::nullopt;
  ParsedAction out;
  if (payload->contains("thought") && (*payload)["thought"].is_string()) out.thought = trim((*payload)["thought"].get<std::string>());
  std::string argument;
  if (payload->contains("argument") && (*payload)["argument"].is_string()) argument = (*payload)["argument"];
  out.action = make_action(std::string(text), (*payload)["action"].get<std::string>(), std::move(argument));
  return out;
}

std::string char_prefix(std::string_view s, std::size_t chars) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (count == chars) return std::string(s.substr(0, i));
      ++count;
    }
  }
  return std::string(s);
}

}  // namespace

ParsedAction parse_action(std::string_view completion) {
  std::string why;
  if (auto line = parse_line_format(completion, why)) return *line;
  if (auto payload = parse_payload_format(completion)) return *payload;
  throw ActionParseError(std::string(completion), why);
}

std::vector<std::string> transcript_violations(const AgentTranscript& t, int max_iterations, int max_searches) {
  std::vector<std::string> out;
  if (t.iterations_used > max_iterations) out.push_back(fmt::format("iterations_used {} > {}", t.iterations_used, max_iterations));
  if (t.searches_used > max_searches) out.push_back(fmt::format("searches_used {} > {}", t.searches_used, max_searches));
  if (t.steps.empty()) {
    out.emplace_back("transcript has no steps");
    return out;
  }
  if (t.steps.back().action.kind != AgentAction::Kind::Answer) out.emplace_back("last step is not an Answer");
  for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
    if (t.steps[i].action.kind == AgentAction::Kind::Answer) out.push_back(fmt::format("step {} answers early", i));
  }
  std::set<std::string> queries;
  int executed = 0;
  for (const auto& s : t.steps) {
    if (s.action.kind != AgentAction::Kind::Search || !s.executed) continue;
    ++executed;
    if (!queries.insert(trim(s.action.argument)).second) out.push_back("duplicate search '" + s.action.argument + "'");
  }
  if (executed != t.searches_used) out.push_back(fmt::format("{} executed searches but searches_used {}", executed, t.searches_used));
  if (trim(t.final_answer).empty()) out.emplace_back("empty final answer");
  return out;
}

std::vector<nlohmann::json> transcript_log(const AgentTranscript& t) {
  std::vector<nlohmann::json> out;
  for (const auto& s : t.steps) {
    out.push_back({{"iteration", s.iteration},
                   {"thought", s.thought},
                   {"action_kind", std::string(to_string(s.action.kind))},
                   {"argument", s.action.argument},
                   {"observation_digest", fnv1a_hex(s.observation)},
                   {"executed", s.executed}});
  }
  return out;
}

nlohmann::json to_json(const AgentTranscript& t) {
  return {{"steps", transcript_log(t)},
          {"searches_used", t.searches_used},
          {"iterations_used", t.iterations_used},
          {"parse_failures", t.parse_failures},
          {"final_answer", t.final_answer}};
}

std::string format_observation(std::span<const retrieval::RankedEvidence> hits, std::size_t chars) {
  if (hits.empty()) return "No results.";
  std::string out;
  for (const auto& h : hits) {
    if (!out.empty()) out += '\n';
    out += "[" + h.passage.title + "] " + char_prefix(h.passage.text, chars);
  }
  return out;
}

std::string working_task(const planner::Plan& plan, std::string_view note) {
  std::string task = plan.original.text;
  if (!plan.clarified.empty()) {
    task += "\nClarified questions (answer each):";
    for (const auto& c : plan.clarified) task += fmt::format("\n({}) {}", c.index, c.text);
  }
  if (!note.empty()) task += "\n" + std::string(note);
  return task;
}

namespace {

class Episode {
 public:
  Episode(const Question& q, const planner::Plan& plan, const EpisodeContext& ctx, std::string_view note)
      : q_(q), plan_(plan), ctx_(ctx), note_(note) {}

  EpisodeResult run() {
    try {
      for (int iteration = 1; iteration <= ctx_.cfg.max_iterations; ++iteration) {
        t_.iterations_used = iteration;
        const auto reply = ctx_.agent.complete(react_prompt());
        ParsedAction parsed;
        try {
          parsed = parse_action(reply.text);
        } catch (const ActionParseError& e) {
          ++t_.parse_failures;
          warn(fmt::format("iteration {}: {}", iteration, e.what()));
          continue;
        }
        if (parsed.action.kind == AgentAction::Kind::Answer) return finish(iteration, std::move(parsed), false);
        step(iteration, std::move(parsed));
      }
      return forced();
    } catch (const provider::AuthError&) {
      throw;
    } catch (const PartialTranscript&) {
      throw;
    } catch (const Error& e) {
      throw PartialTranscript(e.what(), t_);
    }
  }

 private:
  std::string task() const { return working_task(working_plan(), note_); }

  planner::Plan working_plan() const {
    auto p = plan_;
    for (const auto& c : extra_clarified_) p.clarified.push_back(c);
    return p;
  }

  std::string react_prompt() const {
    return ctx_.prompts.render("react", {{"{max_searches}", std::to_string(ctx_.cfg.max_searches)},
                                         {"{current_searches}", std::to_string(t_.searches_used)},
                                         {"{query}", task()},
                                         {"{context}", context_.empty() ? std::string("(none)") : context_}});
  }

  void warn(std::string msg) {
    spdlog::debug("agent on '{}': {}", q_.id, msg);
    t_.warnings.push_back(std::move(msg));
  }

  void record(AgentStep s) {
    context_ += fmt::format("{}[{}] {}[{}]\n{}\n", context_.empty() ? "" : "\n", s.iteration,
                            to_string(s.action.kind), s.action.argument, s.observation);
    t_.steps.push_back(std::move(s));
  }

  void step(int iteration, ParsedAction parsed) {
    AgentStep s{iteration, std::move(parsed.thought), std::move(parsed.action), {}, true, false};
    if (s.action.kind == AgentAction::Kind::Search) {
      const auto query = trim(s.action.argument);
      if (searched_.contains(query)) {
        s.executed = false;
        s.observation = "duplicate query rejected: " + query;
      } else if (t_.searches_used >= ctx_.cfg.max_searches) {
        s.executed = false;
        s.observation = "search budget exhausted; answer now";
      } else {
        const auto hits = ctx_.retriever.retrieve(query, ctx_.cfg.top_k);
        searched_.insert(query);
        ++t_.searches_used;
        s.observation = format_observation(hits, ctx_.cfg.snippet_chars);
      }
    } else {
      s.observation = plan_again();
    }
    record(std::move(s));
  }

  std::string plan_again() {
    if (ctx_.planner == nullptr || ctx_.mode == PlanningMode::Disabled) return "planning unavailable";
    if (ctx_.mode == PlanningMode::DetectOnly) {
      try {
        const auto a = ctx_.planner->analyze(q_);
        return "analysis: " + planner::to_json(a).dump();
      } catch (const planner::PlannerFormatError& e) {
        return std::string("planning failed: ") + e.what();
      }
    }
    std::vector<std::string> warnings;
    const auto p = ctx_.planner->plan(q_, &warnings);
    for (auto& w : warnings) warn(std::move(w));
    std::vector<std::string> added;
    auto known = working_plan();
    for (const auto& c : p.clarified) {
      const bool seen = std::any_of(known.clarified.begin(), known.clarified.end(),
                                    [&](const ClarifiedQuestion& k) { return k.text == c.text; });
      if (seen) continue;
      auto copy = c;
      copy.index = static_cast<int>(known.clarified.size()) + 1;
      known.clarified.push_back(copy);
      extra_clarified_.push_back(copy);
      added.push_back(c.text);
    }
    if (added.empty()) return "planning found no new clarified questions";
    std::string obs = "new clarified questions:";
    for (const auto& a : added) obs += "\n- " + a;
    return obs;
  }

  EpisodeResult finish(int iteration, ParsedAction parsed, bool forced) {
    AgentStep s{iteration, std::move(parsed.thought), std::move(parsed.action), {}, true, forced};
    t_.final_answer = trim(s.action.argument);
    t_.steps.push_back(std::move(s));
    return {t_.final_answer, t_};
  }

  EpisodeResult forced() {
    const int iteration = ctx_.cfg.max_iterations + 1;
    const auto prompt = react_prompt() + ctx_.prompts.get("react_force_answer");
    const auto reply = ctx_.agent.complete(prompt);
    std::string thought;
    try {
      auto parsed = parse_action(reply.text);
      if (parsed.action.kind == AgentAction::Kind::Answer) return finish(iteration, std::move(parsed), true);
      thought = std::move(parsed.thought);
      warn("forced step did not answer; synthesizing");
    } catch (const ActionParseError& e) {
      ++t_.parse_failures;
      warn(std::string("forced step unparseable; synthesizing: ") + e.what());
    }
    const auto synthesis = ctx_.agent.complete(ctx_.prompts.render(
        "react_synthesis", {{"{query}", task()}, {"{context}", context_.empty() ? std::string("(none)") : context_}}));
    auto answer = trim(synthesis.text);
    if (answer.empty()) throw PartialTranscript("synthesis produced an empty answer", t_);
    ParsedAction parsed{std::move(thought), {AgentAction::Kind::Answer, std::move(answer)}};
    return finish(iteration, std::move(parsed), true);
  }

  const Question& q_;
  const planner::Plan& plan_;
  const EpisodeContext& ctx_;
  std::string note_;
  AgentTranscript t_;
  std::string context_;
  std::set<std::string> searched_;
  std::vector<ClarifiedQuestion> extra_clarified_;
};

}  // namespace

EpisodeResult run_episode(const Question& q, const planner::Plan& plan, const EpisodeContext& ctx,
                          std::string_view task_note) {
  if (ctx.cfg.max_iterations < 1) throw PreconditionError("max_iterations must be at least 1");
  return Episode(q, plan, ctx, task_note).run();
}

PredictionRecord answer_clarion(const Question& q, const EpisodeContext& ctx, std::string system) {
  PredictionRecord rec;
  rec.question_id = q.id;
  rec.system = std::move(system);
  try {
    planner::Plan plan{q, planner::unambiguous_analysis(""), {}};
    std::string note;
    std::vector<std::string> warnings;
    if (ctx.planner != nullptr && ctx.mode == PlanningMode::Full) {
      plan = ctx.planner->plan(q, &warnings);
    } else if (ctx.planner != nullptr && ctx.mode == PlanningMode::DetectOnly) {
      for (int attempt = 0; attempt < 2; ++attempt) {
        try {
          plan.analysis = ctx.planner->analyze(q);
          break;
        } catch (const planner::PlannerFormatError& e) {
          warnings.emplace_back(e.what());
        }
      }
      if (plan.analysis.is_ambiguous) {
        note = fmt::format("Note: the question looks {}-ambiguous. {}", to_string(*plan.analysis.type),
                           plan.analysis.clarification_needed);
        note = trim(note);
      }
    }
    auto result = run_episode(q, plan, ctx, note);
    rec.long_answer = result.final_answer;
    rec.transcript = to_json(result.transcript);
    rec.transcript["plan"] = planner::to_json(plan);
  } catch (const PartialTranscript& e) {
    rec.error = e.what();
    rec.transcript = to_json(e.transcript());
  } catch (const provider::AuthError&) {
    throw;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace mirage::actor
