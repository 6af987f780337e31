#include "mirage/baselines/baselines.hpp"

#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mirage/core/text.hpp"
#include "mirage/provider/structured.hpp"

namespace mirage::baselines {

std::string_view to_string(EvidenceLabel l) noexcept {
  switch (l) {
    case EvidenceLabel::Useful: return "useful";
    case EvidenceLabel::PartialUseful: return "partial_useful";
    case EvidenceLabel::Useless: return "useless";
  }
  return "partial_useful";
}

std::optional<EvidenceLabel> parse_evidence_label(std::string_view s) {
  auto v = to_lower_ascii(trim(s));
  for (auto& c : v) {
    if (c == '-' || c == ' ') c = '_';
  }
  if (v == "useful") return EvidenceLabel::Useful;
  if (v == "partial_useful" || v == "partially_useful" || v == "partial") return EvidenceLabel::PartialUseful;
  if (v == "useless") return EvidenceLabel::Useless;
  return std::nullopt;
}

std::string format_passages(std::span<const retrieval::RankedEvidence> passages) {
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += fmt::format("[{}] {}\n{}", i + 1, passages[i].passage.title, passages[i].passage.text);
  }
  return out;
}

namespace {

PredictionRecord finish(const Question& q, std::string system, const provider::Completion& c) {
  auto answer = trim(c.text);
  if (answer.empty()) throw EmptyAnswer(system);
  return PredictionRecord{q.id, std::move(system), std::move(answer), std::nullopt, std::nullopt, nullptr, std::nullopt};
}

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += fmt::format("{}{}. {}", i ? "\n" : "", i + 1, items[i]);
  return out;
}

}  // namespace

PredictionRecord answer_no_retrieval(const Question& q, const provider::LlmClient& client,
                                     const PromptLibrary& prompts) {
  return finish(q, "no_retrieval", client.complete(prompts.render("no_retrieval", {{"{{QUESTION}}", q.text}})));
}

PredictionRecord answer_naive_rag(const Question& q, const retrieval::Retriever& retriever,
                                  const provider::LlmClient& client, std::size_t k, const PromptLibrary& prompts) {
  const auto hits = retriever.retrieve(q.text, k);
  const auto prompt = prompts.render("naive_rag", {{"{{PASSAGES}}", format_passages(hits)}, {"{{QUESTION}}", q.text}});
  auto rec = finish(q, "naive_rag", client.complete(prompt));
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& h : hits) ids.push_back(h.passage.doc_id);
  rec.transcript = {{"evidence_ids", std::move(ids)}};
  return rec;
}

PredictionRecord answer_diva(const Question& q, const retrieval::Retriever& retriever,
                             const provider::LlmClient& client, const DivaConfig& cfg, const PromptLibrary& prompts,
                             DivaTrace* trace) {
  DivaTrace local;
  auto& t = trace ? *trace : local;
  auto warn = [&](std::string msg) {
    spdlog::warn("diva on '{}': {}", q.id, msg);
    t.warnings.push_back(std::move(msg));
  };

  // Diversify
  const auto n = std::max<std::size_t>(1, cfg.interpretations);
  const auto diversify = client.complete(
      prompts.render("diva_diversify", {{"{{N}}", std::to_string(n)}, {"{{QUESTION}}", q.text}}));
  if (auto payload = provider::try_extract_structured(diversify.text, {"interpretations"});
      payload && (*payload)["interpretations"].is_array()) {
    std::set<std::string> seen;
    for (const auto& item : (*payload)["interpretations"]) {
      if (!item.is_string()) continue;
      auto s = trim(item.get<std::string>());
      if (s.empty() || !seen.insert(s).second) continue;
      t.interpretations.push_back(std::move(s));
      if (t.interpretations.size() == n) break;
    }
  }
  if (t.interpretations.empty()) {
    warn("diversification unreadable; using the original question");
    t.interpretations.push_back(q.text);
  }

  std::set<std::string> seen_docs;
  for (const auto& interp : t.interpretations) {
    for (auto& hit : retriever.retrieve(interp, cfg.top_k)) {
      if (seen_docs.insert(hit.passage.doc_id).second) t.pool.push_back(std::move(hit));
    }
  }

  // Verify
  const auto interps = bullet_list(t.interpretations);
  const auto verify = client.complete(prompts.render(
      "diva_verify", {{"{{INTERPRETATIONS}}", interps}, {"{{PASSAGES}}", format_passages(t.pool)}}));
  t.label = EvidenceLabel::PartialUseful;
  const auto payload = provider::try_extract_structured(verify.text, {"label"});
  std::optional<EvidenceLabel> label;
  if (payload && (*payload)["label"].is_string()) label = parse_evidence_label((*payload)["label"].get<std::string>());
  if (label) {
    t.label = *label;
  } else {
    warn("verify label unreadable; treating evidence as partial_useful");
  }

  // Adapt
  const Substitutions base = {{"{{INTERPRETATIONS}}", interps}, {"{{QUESTION}}", q.text}};
  switch (t.label) {
    case EvidenceLabel::Useful:
    case EvidenceLabel::PartialUseful: {
      auto subs = base;
      subs.emplace_back("{{PASSAGES}}", format_passages(t.pool));
      t.final_prompt = prompts.render(t.label == EvidenceLabel::Useful ? "diva_answer_useful" : "diva_answer_partial", subs);
      break;
    }
    case EvidenceLabel::Useless:
      t.final_prompt = prompts.render("diva_answer_useless", base);
      break;
  }
  auto rec = finish(q, "diva", client.complete(t.final_prompt));
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& h : t.pool) ids.push_back(h.passage.doc_id);
  rec.transcript = {{"interpretations", t.interpretations},
                    {"label", std::string(to_string(t.label))},
                    {"evidence_ids", std::move(ids)}};
  return rec;
}

}  // namespace mirage::baselines
