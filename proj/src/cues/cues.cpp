#include "mirage/cues/cues.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "mirage/core/text.hpp"

namespace mirage::cues {

std::vector<std::string> passage_tokens(const Passage& p) { return normalized_tokens(p.title + " " + p.text); }

HitIndex::HitIndex(const retrieval::Corpus& corpus) {
  docs_.reserve(corpus.size());
  for (const auto& p : corpus.passages()) {
    auto tokens = passage_tokens(p);
    for (const auto& t : tokens) ++corpus_counts_[t];
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    docs_.push_back(std::move(tokens));
  }
}

std::size_t HitIndex::total_hits(std::string_view query) const {
  auto terms = normalized_tokens(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  if (terms.empty()) return docs_.size();
  std::size_t hits = 0;
  for (const auto& doc : docs_) {
    if (std::includes(doc.begin(), doc.end(), terms.begin(), terms.end())) ++hits;
  }
  return hits;
}

std::size_t total_hits(std::string_view query, const retrieval::Corpus& corpus) {
  return HitIndex(corpus).total_hits(query);
}

double kl_divergence(const TokenCounts& top, const TokenCounts& corpus, double epsilon) {
  double n_top = 0.0;
  double n_corpus = 0.0;
  for (const auto& [_, c] : top) n_top += static_cast<double>(c);
  for (const auto& [_, c] : corpus) n_corpus += static_cast<double>(c);
  if (n_top <= 0.0) throw EmptySnippets();
  if (n_corpus <= 0.0) throw PreconditionError("corpus distribution is empty");

  std::set<std::string_view> vocab;
  for (const auto& [w, c] : top) {
    if (c > 0) vocab.insert(w);
  }
  for (const auto& [w, c] : corpus) {
    if (c > 0) vocab.insert(w);
  }
  const double z = 1.0 + epsilon * static_cast<double>(vocab.size());

  auto count_in = [](const TokenCounts& m, std::string_view w) -> double {
    auto it = m.find(w);
    return it == m.end() ? 0.0 : static_cast<double>(it->second);
  };

  // Sum of p*ln(p/q) - p + q: every term is non-negative and the extra terms
  // cancel because both distributions sum to one.
  double kl = 0.0;
  for (auto w : vocab) {
    const double p = (count_in(top, w) / n_top + epsilon) / z;
    const double q = (count_in(corpus, w) / n_corpus + epsilon) / z;
    if (p <= 0.0) {
      kl += q;
      continue;
    }
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p * std::log(p / q) - p + q;
  }
  return std::max(0.0, kl);
}

double kl_divergence(std::string_view query, const retrieval::Retriever& retriever, std::size_t k,
                     const HitIndex& index) {
  if (k == 0) throw PreconditionError("k must be at least 1");
  TokenCounts top;
  for (const auto& hit : retriever.retrieve(query, k)) {
    for (auto& t : passage_tokens(hit.passage)) ++top[std::move(t)];
  }
  return kl_divergence(top, index.corpus_counts());
}

std::string_view to_string(Constraint::Kind k) noexcept {
  switch (k) {
    case Constraint::Kind::Date: return "date";
    case Constraint::Kind::Year: return "year";
    case Constraint::Kind::Number: return "number";
    case Constraint::Kind::Quoted: return "quoted";
  }
  return "number";
}

std::string tidy_variant(std::string_view s) {
  const auto collapsed = collapse_whitespace(s);
  std::string out;
  out.reserve(collapsed.size());
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    const char c = collapsed[i];
    if (c == ' ' && i + 1 < collapsed.size()) {
      const char next = collapsed[i + 1];
      if (next == ',' || next == '.' || next == ';' || next == ':' || next == '?' || next == '!') continue;
    }
    if (c == ',' && !out.empty() && out.back() == ',') continue;
    out.push_back(c);
  }
  return out;
}

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
  Constraint::Kind kind;
};

const std::set<std::string>& prepositions() {
  static const std::set<std::string> p = {"in",    "on",     "at",     "during", "since", "from", "by",
                                          "before", "after", "until", "circa",  "around", "about", "of"};
  return p;
}

bool overlaps(const std::vector<Span>& taken, std::size_t b, std::size_t e) {
  return std::any_of(taken.begin(), taken.end(), [&](const Span& s) { return b < s.end && s.begin < e; });
}

void find_quoted(std::string_view q, std::vector<Span>& out) {
  static constexpr std::string_view kOpenCurly = "\xE2\x80\x9C";
  static constexpr std::string_view kCloseCurly = "\xE2\x80\x9D";
  std::size_t i = 0;
  while (i < q.size()) {
    if (q[i] == '"') {
      const auto close = q.find('"', i + 1);
      if (close == std::string_view::npos) return;
      if (close > i + 1) out.push_back({i, close + 1, Constraint::Kind::Quoted});
      i = close + 1;
    } else if (q.compare(i, kOpenCurly.size(), kOpenCurly) == 0) {
      const auto close = q.find(kCloseCurly, i + kOpenCurly.size());
      if (close == std::string_view::npos) return;
      if (close > i + kOpenCurly.size()) out.push_back({i, close + kCloseCurly.size(), Constraint::Kind::Quoted});
      i = close + kCloseCurly.size();
    } else {
      ++i;
    }
  }
}

void find_regex(const std::string& q, const std::regex& re, Constraint::Kind kind, std::vector<Span>& taken) {
  for (auto it = std::sregex_iterator(q.begin(), q.end(), re); it != std::sregex_iterator(); ++it) {
    const auto b = static_cast<std::size_t>(it->position(0));
    const auto e = b + static_cast<std::size_t>(it->length(0));
    if (!overlaps(taken, b, e)) taken.push_back({b, e, kind});
  }
}

const std::vector<std::regex>& date_patterns() {
  static const std::string month =
      "(?:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|"
      "sep(?:t(?:ember)?)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)\\.?";
  static const std::string ord = "(?:st|nd|rd|th)?";
  static const auto flags = std::regex::ECMAScript | std::regex::icase;
  static const std::vector<std::regex> patterns = {
      std::regex(R"(\b\d{4}-\d{1,2}-\d{1,2}\b)", flags),
      std::regex(R"(\b\d{1,2}/\d{1,2}/\d{2,4}\b)", flags),
      std::regex("\\b" + month + "\\s+\\d{1,2}" + ord + ",?\\s+\\d{4}\\b", flags),
      std::regex("\\b\\d{1,2}" + ord + "\\s+(?:of\\s+)?" + month + "\\s+\\d{4}\\b", flags),
      std::regex("\\b" + month + "\\s+\\d{4}\\b", flags),
      std::regex("\\b" + month + "\\s+\\d{1,2}" + ord + "\\b", flags),
  };
  return patterns;
}

struct Word {
  std::size_t begin;
  std::string lower;
};

/// The whitespace-separated word ending right before `pos`, if any.
std::optional<Word> previous_word(std::string_view q, std::size_t pos) {
  std::size_t i = pos;
  while (i > 0 && q[i - 1] == ' ') --i;
  if (i == pos) return std::nullopt;  // glued to the previous token
  const auto word_end = i;
  while (i > 0 && std::isalpha(static_cast<unsigned char>(q[i - 1]))) --i;
  if (i == word_end) return std::nullopt;
  if (i > 0 && q[i - 1] != ' ' && q[i - 1] != '(') return std::nullopt;
  return Word{i, to_lower_ascii(q.substr(i, word_end - i))};
}

bool followed_by_word(std::string_view q, std::size_t pos) {
  while (pos < q.size() && q[pos] == ' ') ++pos;
  return pos < q.size() && std::isalnum(static_cast<unsigned char>(q[pos]));
}

bool is_article(const std::string& w) { return w == "the" || w == "a" || w == "an"; }

/// Start of the removed range for a constraint at [begin, end): a governing
/// preposition comes along, and so does "the" in "during the 1920s". A number
/// that modifies a following word ("at 100 degrees") keeps its context.
std::size_t removal_begin(std::string_view q, const Span& s) {
  if (s.kind == Constraint::Kind::Number && followed_by_word(q, s.end)) return s.begin;
  auto w = previous_word(q, s.begin);
  if (!w) return s.begin;
  if (is_article(w->lower)) {
    if (s.kind == Constraint::Kind::Quoted || followed_by_word(q, s.end)) return s.begin;
    const auto prep = previous_word(q, w->begin);
    return prep && prepositions().contains(prep->lower) ? prep->begin : w->begin;
  }
  return prepositions().contains(w->lower) ? w->begin : s.begin;
}

}  // namespace

std::vector<RelaxVariant> relax_variants(std::string_view query) {
  const std::string q(query);
  std::vector<Span> spans;
  find_quoted(q, spans);
  for (const auto& re : date_patterns()) find_regex(q, re, Constraint::Kind::Date, spans);
  static const std::regex year(R"(\b(?:1\d{3}|20\d{2})s?\b)");
  find_regex(q, year, Constraint::Kind::Year, spans);
  static const std::regex number(R"(\b\d+(?:[.,]\d+)*(?:st|nd|rd|th|s)?\b)");
  find_regex(q, number, Constraint::Kind::Number, spans);

  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });

  std::vector<RelaxVariant> out;
  out.reserve(spans.size());
  for (const auto& s : spans) {
    Constraint c;
    c.kind = s.kind;
    c.text = q.substr(s.begin, s.end - s.begin);
    c.begin = removal_begin(q, s);
    c.end = s.end;
    auto text = tidy_variant(q.substr(0, c.begin) + " " + q.substr(c.end));
    out.push_back({std::move(text), std::move(c)});
  }
  return out;
}

std::optional<double> relax_delta_ratio(std::string_view query, const HitIndex& index) {
  const auto variants = relax_variants(query);
  if (variants.empty()) return std::nullopt;
  const auto base = index.total_hits(query);
  if (base == 0) return std::nullopt;
  double best = 0.0;
  for (const auto& v : variants) {
    best = std::max(best, static_cast<double>(index.total_hits(v.text)) / static_cast<double>(base));
  }
  return best;
}

GeneralAmbiguityCues compute_cues(std::string_view query, const retrieval::Retriever& retriever,
                                  const HitIndex& index, std::size_t k) {
  GeneralAmbiguityCues cues;
  cues.total_hits = index.total_hits(query);
  try {
    cues.kl_divergence = kl_divergence(query, retriever, k, index);
  } catch (const EmptySnippets&) {
    cues.kl_divergence.reset();
  }
  cues.relax_delta_ratio = relax_delta_ratio(query, index);
  cues.variants = relax_variants(query);
  return cues;
}

nlohmann::json to_json(const GeneralAmbiguityCues& cues) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& v : cues.variants) {
    variants.push_back({{"variant", v.text},
                        {"removed",
                         {{"kind", std::string(to_string(v.removed.kind))},
                          {"text", v.removed.text},
                          {"begin", v.removed.begin},
                          {"end", v.removed.end}}}});
  }
  return {{"total_hits", cues.total_hits},
          {"kl_divergence", cues.kl_divergence ? nlohmann::json(*cues.kl_divergence) : nlohmann::json(nullptr)},
          {"relax_delta_ratio",
           cues.relax_delta_ratio ? nlohmann::json(*cues.relax_delta_ratio) : nlohmann::json(nullptr)},
          {"variants", std::move(variants)}};
}

std::string render_cue_prompt(std::string_view question, const std::optional<GeneralAmbiguityCues>& cues,
                              const PromptLibrary& prompts) {
  std::string hits = "n/a";
  std::string kl = "n/a";
  std::string ratio = "n/a";
  if (cues) {
    hits = std::to_string(cues->total_hits);
    if (cues->kl_divergence) kl = fmt::format("{:.4f}", *cues->kl_divergence);
    if (cues->relax_delta_ratio) ratio = fmt::format("{:.4f}", *cues->relax_delta_ratio);
  }
  return prompts.render("detect_general", {{"{{QUESTION}}", std::string(question)},
                                           {"{{TOTAL_HITS}}", hits},
                                           {"{{KL_DIVERGENCE}}", kl},
                                           {"{{RELAX_DELTA_RATIO}}", ratio}});
}

}  // namespace mirage::cues
