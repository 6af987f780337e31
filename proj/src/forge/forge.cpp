#include "mirage/forge/forge.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mirage/core/instance.hpp"
#include "mirage/core/parallel.hpp"
#include "mirage/core/text.hpp"
#include "mirage/provider/structured.hpp"

namespace mirage::forge {

using provider::LlmClient;
using retrieval::RankedEvidence;

bool ConsensusLabel::has(AmbiguityType t) const {
  return std::find(types.begin(), types.end(), t) != types.end();
}

namespace {

std::string template_name(std::string_view stem, AmbiguityType t) {
  return std::string(stem) + "_" + std::string(to_string(t));
}

std::string detection_prompt(const Question& q, AmbiguityType t, const PromptLibrary& prompts,
                             const std::optional<cues::GeneralAmbiguityCues>& cues) {
  if (t == AmbiguityType::General) return cues::render_cue_prompt(q.text, cues, prompts);
  return prompts.render(template_name("detect", t), {{"{{QUESTION}}", q.text}});
}

std::string string_field(const nlohmann::json& payload, const char* key) {
  const auto& v = payload.at(key);
  if (!v.is_string()) throw provider::PayloadError(std::string("'") + key + "' is not a string");
  return v.get<std::string>();
}

}  // namespace

DetectorVerdict detect_types(const Question& q, const LlmClient& detector, const PromptLibrary& prompts,
                             const std::optional<cues::GeneralAmbiguityCues>& cues) {
  DetectorVerdict v;
  v.detector_id = detector.model_name();
  for (auto t : kAmbiguityTypes) {
    auto warn = [&](const std::string& why) {
      auto msg = fmt::format("detector '{}' on {} for '{}': {} (vote 0)", v.detector_id, to_string(t), q.id, why);
      spdlog::warn("{}", msg);
      v.warnings.push_back(std::move(msg));
    };
    try {
      const auto reply = detector.complete(detection_prompt(q, t, prompts, cues));
      const auto payload = provider::extract_structured(reply.text, {"is_ambiguous"});
      const auto yes = provider::parse_yes_no(payload["is_ambiguous"]);
      if (!yes) {
        warn("unreadable is_ambiguous value " + payload["is_ambiguous"].dump());
        continue;
      }
      v.votes[type_index(t)] = *yes;
    } catch (const provider::AuthError&) {
      throw;
    } catch (const provider::ProviderError& e) {
      warn(e.what());
    } catch (const provider::PayloadError& e) {
      warn(e.what());
    }
  }
  return v;
}

std::vector<DetectorVerdict> detect_types(const Question& q, std::span<const LlmClient> detectors,
                                          const PromptLibrary& prompts,
                                          const std::optional<cues::GeneralAmbiguityCues>& cues) {
  if (detectors.empty()) throw PreconditionError("detection needs at least one detector");
  std::vector<DetectorVerdict> out;
  out.reserve(detectors.size());
  for (const auto& d : detectors) out.push_back(detect_types(q, d, prompts, cues));
  return out;
}

ConsensusLabel consensus(std::string question_id, std::span<const DetectorVerdict> verdicts) {
  if (verdicts.empty()) throw EmptyVerdicts();
  ConsensusLabel label;
  label.question_id = std::move(question_id);
  for (auto t : kAmbiguityTypes) {
    const bool all = std::all_of(verdicts.begin(), verdicts.end(), [t](const DetectorVerdict& v) { return v.vote(t); });
    if (all) label.types.push_back(t);
  }
  return label;
}

std::vector<ClarifiedQuestion> clarify_for_type(const Question& q, AmbiguityType t, const LlmClient& generator,
                                                const PromptLibrary& prompts, std::size_t min_versions) {
  const auto prompt = prompts.render(template_name("clarify", t),
                                     {{"{{QUESTION}}", q.text}, {"{{MIN_VERSIONS}}", std::to_string(min_versions)}});
  const auto payload = provider::extract_structured(generator.complete(prompt).text, {"clarified_queries"});
  const auto& arr = payload["clarified_queries"];
  if (!arr.is_array()) throw provider::PayloadError("'clarified_queries' is not an array");
  std::vector<ClarifiedQuestion> out;
  for (const auto& item : arr) {
    if (!item.is_string()) continue;
    auto text = trim(item.get<std::string>());
    if (text.empty()) continue;
    out.push_back({q.id, t, std::move(text), static_cast<int>(out.size()) + 1});
  }
  if (out.size() < min_versions) throw TooFewClarifications(out.size(), min_versions);
  return out;
}

std::vector<std::string> parse_sub_questions(std::string_view reply) {
  static const std::regex bullet(R"(^\s*(?:[*\-]|\d+[.)])\s+(.+?)\s*$)");
  std::vector<std::string> out;
  auto scan_lines = [&](std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::smatch m;
    while (std::getline(in, line)) {
      if (std::regex_match(line, m, bullet)) out.push_back(trim(m[1].str()));
    }
  };
  scan_lines(reply);
  if (!out.empty()) return out;

  const auto payload = provider::try_extract_structured(reply);
  if (!payload) return out;
  if (payload->contains("sub_queries") && (*payload)["sub_queries"].is_array()) {
    for (const auto& s : (*payload)["sub_queries"]) {
      if (s.is_string() && !trim(s.get<std::string>()).empty()) out.push_back(trim(s.get<std::string>()));
    }
  } else if (payload->contains("sub_query") && (*payload)["sub_query"].is_string()) {
    const auto s = (*payload)["sub_query"].get<std::string>();
    scan_lines(s);
    if (out.empty() && !trim(s).empty()) out.push_back(trim(s));
  }
  return out;
}

std::vector<std::string> decompose(const ClarifiedQuestion& c, const LlmClient& generator,
                                   const PromptLibrary& prompts) {
  const auto reply = generator.complete(prompts.render("decompose", {{"{{QUESTION}}", c.text}}));
  auto subs = parse_sub_questions(reply.text);
  if (subs.empty()) {
    if (!provider::try_extract_structured(reply.text) && reply.text.find('*') == std::string::npos) {
      throw provider::NoPayload();
    }
    throw DecompositionEmpty();
  }
  return subs;
}

std::vector<RankedEvidence> collect_documents(const ClarifiedQuestion& c, std::span<const std::string> sub_questions,
                                              const retrieval::Retriever& retriever, std::size_t k) {
  if (retriever.corpus().empty()) throw PreconditionError("evidence collection on an empty corpus");
  std::vector<RankedEvidence> pool;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sub_questions.size(); ++i) {
    for (auto& hit : retriever.retrieve(sub_questions[i], k)) {
      if (!seen.insert(hit.passage.doc_id).second) continue;
      hit.origin = retrieval::Origin::sub_question(static_cast<int>(i) + 1);
      pool.push_back(std::move(hit));
    }
  }
  if (pool.size() < k) {
    for (auto& hit : retriever.retrieve(c.text, k)) {
      if (pool.size() >= k) break;
      if (!seen.insert(hit.passage.doc_id).second) continue;
      hit.origin = retrieval::Origin::backfill();
      pool.push_back(std::move(hit));
    }
  }
  if (pool.empty()) return pool;
  return retrieval::rerank(c, std::move(pool), retriever.embedder());
}

std::vector<RankedEvidence> collect_documents(const ClarifiedQuestion& c, const retrieval::Retriever& retriever,
                                              const LlmClient& generator, const PromptLibrary& prompts,
                                              std::size_t k) {
  const auto subs = decompose(c, generator, prompts);
  return collect_documents(c, subs, retriever, k);
}

std::string passage_context(const Passage& p) { return p.title + "\n" + p.text; }

std::optional<ShortAnswer> generate_short_answer(const ClarifiedQuestion& c, std::span<const RankedEvidence> evidence,
                                                 const LlmClient& generator, const PromptLibrary& prompts) {
  if (evidence.empty()) throw PreconditionError("short answer generation needs evidence");
  for (const auto& ev : evidence) {
    const auto context = passage_context(ev.passage);
    const auto reply = generator.complete(
        prompts.render("short_answer", {{"{{QUESTION}}", c.text}, {"{{PASSAGE}}", context}}));
    const auto payload = provider::try_extract_structured(reply.text, {"short_answer"});
    if (!payload || !(*payload)["short_answer"].is_string()) continue;
    const auto span = trim((*payload)["short_answer"].get<std::string>());
    if (span.empty()) continue;
    if (context.find(span) == std::string::npos) {
      spdlog::debug("span '{}' is not verbatim in passage {}", span, ev.passage.doc_id);
      continue;
    }
    return ShortAnswer{c.index, span, ev.passage.doc_id};
  }
  return std::nullopt;
}

ShortAnswer shorten_answer(const ShortAnswer& a, const ClarifiedQuestion& c, const LlmClient& generator,
                           const PromptLibrary& prompts) {
  if (normalized_tokens(a.text).size() <= kMaxShortAnswerTokens) return a;
  const auto prompt = prompts.render("shorten_answer", {{"{{MAX_TOKENS}}", std::to_string(kMaxShortAnswerTokens)},
                                                        {"{{QUESTION}}", c.text},
                                                        {"{{ANSWER}}", a.text}});
  std::size_t last_tokens = normalized_tokens(a.text).size();
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto payload = provider::try_extract_structured(generator.complete(prompt).text, {"short_answer"});
    if (!payload || !(*payload)["short_answer"].is_string()) continue;
    auto text = trim((*payload)["short_answer"].get<std::string>());
    const auto n = normalized_tokens(text).size();
    last_tokens = n;
    if (n >= 1 && n <= kMaxShortAnswerTokens) return ShortAnswer{a.clarified_index, std::move(text), a.support_passage_id};
  }
  throw ShorteningFailed(last_tokens);
}

bool dedup_filter(std::span<const ShortAnswer> shorts) {
  std::set<std::string> seen;
  for (const auto& s : shorts) {
    if (!seen.insert(normalize_text(s.text)).second) return false;
  }
  return true;
}

std::string generate_long_answer(const Question& q, std::span<const ClarifiedQuestion> clarified,
                                 std::span<const ShortAnswer> shorts, const LlmClient& generator,
                                 const PromptLibrary& prompts) {
  if (shorts.size() < 2 || clarified.size() != shorts.size()) {
    throw PreconditionError("long answer needs at least two paired short answers");
  }
  std::string more;
  for (std::size_t i = 2; i < shorts.size(); ++i) {
    more += fmt::format("\nClarified Q{0} | Short Answer A{0}\n{1}\nA{0} = {2}\n", i + 1, clarified[i].text,
                        shorts[i].text);
  }
  const auto prompt = prompts.render("long_answer", {{"{{SCHEMA}}", R"({"long_answer": "string"})"},
                                                     {"{{QUESTION}}", q.text},
                                                     {"{{CQ1}}", clarified[0].text},
                                                     {"{{A1}}", shorts[0].text},
                                                     {"{{CQ2}}", clarified[1].text},
                                                     {"{{A2}}", shorts[1].text},
                                                     {"{{MORE_PAIRS}}", more}});
  const auto payload = provider::extract_structured(generator.complete(prompt).text, {"long_answer"});
  auto long_answer = trim(string_field(payload, "long_answer"));
  const auto norm = normalize_text(long_answer);
  for (const auto& s : shorts) {
    if (norm.find(normalize_text(s.text)) == std::string::npos) throw LongAnswerMissingShort(s.text);
  }
  return long_answer;
}

void check_judges(std::span<const LlmClient> judges, const std::string& generator_model) {
  if (judges.empty()) throw PreconditionError("alignment filtering needs at least one judge");
  for (const auto& j : judges) {
    if (j.model_name() == generator_model) throw GeneratorJudgeOverlap(generator_model);
  }
}

bool alignment_filter(const MirageInstance& candidate, std::span<const LlmClient> judges,
                      const std::string& generator_model, const PromptLibrary& prompts,
                      std::vector<std::string>* warnings) {
  check_judges(judges, generator_model);
  std::string items;
  for (std::size_t i = 0; i < candidate.clarified.size(); ++i) {
    const auto& c = candidate.clarified[i];
    items += fmt::format("CQ{0}: {1}\n", i + 1, c.text);
    if (i < candidate.short_answers.size()) {
      const auto& sa = candidate.short_answers[i];
      items += fmt::format("A{0}: {1}\n", i + 1, sa.text);
      const auto it = std::find_if(candidate.evidence.begin(), candidate.evidence.end(),
                                   [&](const Passage& p) { return p.doc_id == sa.support_passage_id; });
      if (it != candidate.evidence.end()) {
        items += fmt::format("Passage {0} [{1}]: {2}\n", i + 1, it->title, it->text);
      }
    }
  }
  const auto type = std::string(to_string(candidate.type));
  const auto prompt = prompts.render("alignment_judge", {{"{{TYPE}}", type},
                                                         {"{{QUESTION}}", candidate.question.text},
                                                         {"{{ITEMS}}", items},
                                                         {"{{LONG_ANSWER}}", candidate.long_answer}});
  bool keep = true;
  for (const auto& judge : judges) {
    auto note = [&](const std::string& why) {
      auto msg = fmt::format("judge '{}' on '{}': {} (judged N)", judge.model_name(), candidate.question.id, why);
      spdlog::warn("{}", msg);
      if (warnings) warnings->push_back(std::move(msg));
    };
    try {
      const auto payload = provider::extract_structured(judge.complete(prompt).text, {"aligned"});
      const auto yes = provider::parse_yes_no(payload["aligned"]);
      if (!yes) {
        note("unreadable aligned value " + payload["aligned"].dump());
        keep = false;
      } else if (!*yes) {
        keep = false;
      }
    } catch (const provider::AuthError&) {
      throw;
    } catch (const provider::ProviderError& e) {
      note(e.what());
      keep = false;
    } catch (const provider::PayloadError& e) {
      note(e.what());
      keep = false;
    }
  }
  return keep;
}

std::size_t StageLedger::total(std::size_t stage) const {
  if (stage == 0) return questions;
  const auto& row = per_type.at(stage);
  return row[0] + row[1] + row[2];
}

std::size_t StageLedger::stage_index(std::string_view name) const {
  for (std::size_t i = 0; i < kLedgerStages.size(); ++i) {
    if (kLedgerStages[i] == name) return i;
  }
  throw PreconditionError("unknown ledger stage '" + std::string(name) + "'");
}

bool StageLedger::monotone() const {
  for (std::size_t s = 2; s < kLedgerStages.size(); ++s) {
    if (total(s) > total(s - 1)) return false;
    for (std::size_t t = 0; t < 3; ++t) {
      if (per_type[s][t] > per_type[s - 1][t]) return false;
    }
  }
  return true;
}

nlohmann::json to_json(const StageLedger& ledger) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t s = 0; s < kLedgerStages.size(); ++s) {
    nlohmann::json row = {{"stage", std::string(kLedgerStages[s])}, {"total", ledger.total(s)}};
    if (s > 0) {
      nlohmann::json per = nlohmann::json::object();
      for (auto t : kAmbiguityTypes) per[std::string(to_string(t))] = ledger.per_type[s][type_index(t)];
      row["per_type"] = std::move(per);
    }
    stages.push_back(std::move(row));
  }
  nlohmann::json notes = nlohmann::json::array();
  for (const auto& n : ledger.notes) {
    notes.push_back({{"question_id", n.question_id},
                     {"type", n.type ? nlohmann::json(std::string(to_string(*n.type))) : nlohmann::json(nullptr)},
                     {"stage", n.stage},
                     {"reason", n.reason}});
  }
  return {{"stages", std::move(stages)}, {"notes", std::move(notes)}};
}

namespace {

struct Item {
  ClarifiedQuestion clarified;
  std::vector<RankedEvidence> pool;
  std::optional<ShortAnswer> short_answer;
};

struct QuestionOutcome {
  std::vector<MirageInstance> instances;
  std::array<std::array<std::size_t, 3>, kLedgerStages.size()> counts{};
  std::vector<LedgerNote> notes;
};

class TypeRun {
 public:
  TypeRun(const Question& q, AmbiguityType t, const retrieval::Retriever& retriever, const ForgeConfig& cfg,
          const PromptLibrary& prompts, QuestionOutcome& out)
      : q_(q), t_(t), retriever_(retriever), cfg_(cfg), prompts_(prompts), out_(out) {}

  void run() {
    pass("detected");
    auto clarified = clarify_for_type(q_, t_, cfg_.generator, prompts_, cfg_.min_clarified);
    for (auto& c : clarified) items_.push_back({std::move(c), {}, std::nullopt});
    pass("clarified");

    drop_items("evidenced", [&](Item& it) {
      it.pool = collect_documents(it.clarified, retriever_, cfg_.generator, prompts_, cfg_.top_k);
      return !it.pool.empty();
    });
    if (!enough("evidenced")) return;

    drop_items("short_answered", [&](Item& it) {
      it.short_answer = generate_short_answer(it.clarified, it.pool, cfg_.generator, prompts_);
      return it.short_answer.has_value();
    });
    if (!enough("short_answered")) return;

    drop_items("shortened", [&](Item& it) {
      it.short_answer = shorten_answer(*it.short_answer, it.clarified, cfg_.generator, prompts_);
      return true;
    });
    if (!enough("shortened")) return;

    auto inst = assemble();
    if (!dedup_filter(inst.short_answers)) return fail("deduplicated", "short answers collapse after normalization");
    pass("deduplicated");

    inst.long_answer = generate_long_answer(inst.question, inst.clarified, inst.short_answers, cfg_.generator, prompts_);
    pass("long_answered");

    std::vector<std::string> warnings;
    const bool aligned = alignment_filter(inst, cfg_.judges, cfg_.generator.model_name(), prompts_, &warnings);
    for (auto& w : warnings) note("aligned", std::move(w));
    if (!aligned) return fail("aligned", "not unanimously judged aligned");
    pass("aligned");

    const auto violations = validate_instance(inst);
    if (!violations.empty()) {
      return fail("final", fmt::format("{} at {}: {}", to_string(violations.front().kind), violations.front().field,
                                       violations.front().detail));
    }
    pass("final");
    out_.instances.push_back(std::move(inst));
  }

  void note(std::string stage, std::string reason) {
    out_.notes.push_back({q_.id, t_, std::move(stage), std::move(reason)});
  }

  std::string current_stage() const {
    return std::string(kLedgerStages[std::min(reached_ + 1, kLedgerStages.size() - 1)]);
  }

 private:
  void pass(std::string_view stage) {
    for (std::size_t s = 0; s < kLedgerStages.size(); ++s) {
      if (kLedgerStages[s] == stage) {
        ++out_.counts[s][type_index(t_)];
        reached_ = s;
        return;
      }
    }
  }

  void fail(std::string stage, std::string reason) { note(std::move(stage), std::move(reason)); }

  template <typename Fn>
  void drop_items(std::string_view stage, Fn&& fn) {
    std::vector<Item> kept;
    for (auto& it : items_) {
      try {
        if (fn(it)) {
          kept.push_back(std::move(it));
        } else {
          note(std::string(stage), fmt::format("clarified question {} dropped", it.clarified.index));
        }
      } catch (const provider::AuthError&) {
        throw;
      } catch (const Error& e) {
        note(std::string(stage), fmt::format("clarified question {} dropped: {}", it.clarified.index, e.what()));
      }
    }
    items_ = std::move(kept);
  }

  bool enough(std::string_view stage) {
    if (items_.size() < cfg_.min_clarified) {
      fail(std::string(stage), fmt::format("{} clarified question(s) left", items_.size()));
      return false;
    }
    pass(stage);
    return true;
  }

  MirageInstance assemble() const {
    MirageInstance inst;
    inst.question = q_;
    inst.question.id = q_.id + "#" + std::string(to_string(t_));
    inst.type = t_;
    inst.extra["source_question_id"] = q_.id;
    std::set<std::string> seen;
    int index = 1;
    for (const auto& it : items_) {
      auto c = it.clarified;
      c.parent_id = inst.question.id;
      c.index = index;
      auto sa = *it.short_answer;
      sa.clarified_index = index;
      inst.clarified.push_back(std::move(c));
      inst.short_answers.push_back(std::move(sa));
      for (const auto& ev : it.pool) {
        if (seen.insert(ev.passage.doc_id).second) inst.evidence.push_back(ev.passage);
      }
      ++index;
    }
    return inst;
  }

  const Question& q_;
  AmbiguityType t_;
  const retrieval::Retriever& retriever_;
  const ForgeConfig& cfg_;
  const PromptLibrary& prompts_;
  QuestionOutcome& out_;
  std::vector<Item> items_;
  std::size_t reached_ = 0;
};

QuestionOutcome process_question(const Question& q, const retrieval::Retriever& retriever,
                                 const cues::HitIndex& index, const ForgeConfig& cfg, const PromptLibrary& prompts) {
  QuestionOutcome out;
  std::optional<cues::GeneralAmbiguityCues> cue_values;
  try {
    cue_values = cues::compute_cues(q.text, retriever, index, cfg.top_k);
  } catch (const Error& e) {
    out.notes.push_back({q.id, AmbiguityType::General, "detected", std::string("cues unavailable: ") + e.what()});
  }

  const auto verdicts = detect_types(q, cfg.detectors, prompts, cue_values);
  for (const auto& v : verdicts) {
    for (const auto& w : v.warnings) out.notes.push_back({q.id, std::nullopt, "detected", w});
  }
  const auto label = consensus(q.id, verdicts);
  if (label.types.empty()) {
    out.notes.push_back({q.id, std::nullopt, "detected", "no ambiguity"});
    return out;
  }

  for (auto t : label.types) {
    TypeRun run(q, t, retriever, cfg, prompts, out);
    try {
      run.run();
    } catch (const provider::AuthError&) {
      throw;
    } catch (const PreconditionError&) {
      throw;
    } catch (const Error& e) {
      run.note(run.current_stage(), e.what());
    } catch (const nlohmann::json::exception& e) {
      run.note(run.current_stage(), e.what());
    }
  }
  return out;
}

}  // namespace

ForgeResult run_pipeline(std::span<const Question> questions, const retrieval::Retriever& retriever,
                         const ForgeConfig& cfg, const PromptLibrary& prompts) {
  if (cfg.detectors.empty()) throw PreconditionError("forge needs at least one detector");
  if (!cfg.generator.valid()) throw PreconditionError("forge needs a generator");
  check_judges(cfg.judges, cfg.generator.model_name());

  const cues::HitIndex index(retriever.corpus());
  auto outcomes = parallel_map(questions.size(), cfg.workers, [&](std::size_t i) {
    return process_question(questions[i], retriever, index, cfg, prompts);
  });

  ForgeResult result;
  result.ledger.questions = questions.size();
  for (auto& o : outcomes) {
    for (std::size_t s = 0; s < kLedgerStages.size(); ++s) {
      for (std::size_t t = 0; t < 3; ++t) result.ledger.per_type[s][t] += o.counts[s][t];
    }
    std::move(o.notes.begin(), o.notes.end(), std::back_inserter(result.ledger.notes));
    std::move(o.instances.begin(), o.instances.end(), std::back_inserter(result.instances));
  }
  return result;
}

}  // namespace mirage::forge
