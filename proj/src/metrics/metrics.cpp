#include "mirage/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "mirage/core/text.hpp"
#include "mirage/provider/structured.hpp"

namespace mirage::metrics {

double str_em(std::string_view long_answer, std::span<const std::string> gold_shorts) {
  if (gold_shorts.empty()) throw EmptyGold();
  const auto hay = normalize_text(long_answer);
  std::size_t hits = 0;
  for (const auto& g : gold_shorts) {
    const auto needle = normalize_text(g);
    if (hay.find(needle) != std::string::npos) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold_shorts.size());
}

namespace {

double f1_from_counts(std::size_t overlap, std::size_t pred_len, std::size_t gold_len) {
  if (pred_len == 0 && gold_len == 0) return 1.0;
  if (pred_len == 0 || gold_len == 0 || overlap == 0) return 0.0;
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(pred_len + gold_len);
}

}  // namespace

double token_f1(std::string_view pred, std::string_view gold) {
  const auto p = normalized_tokens(pred);
  const auto g = normalized_tokens(gold);
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return f1_from_counts(overlap, p.size(), g.size());
}

std::string LexicalScorer::extract(const ScorerQuery& q) const {
  if (!q.gold_hint) return {};
  const auto ctx = normalized_tokens(q.context);
  const auto gold = normalized_tokens(*q.gold_hint);
  if (ctx.empty() || gold.empty()) return {};
  std::unordered_map<std::string, std::size_t> need;
  for (const auto& t : gold) ++need[t];
  const auto g = gold.size();

  // F1 = 2*overlap / (len + g); compare candidates by cross-multiplying.
  std::size_t best_i = 0, best_len = 0, best_overlap = 0;
  std::unordered_map<std::string, std::size_t> have;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    have.clear();
    std::size_t overlap = 0;
    for (std::size_t j = i; j < ctx.size(); ++j) {
      const auto it = need.find(ctx[j]);
      if (it != need.end() && have[ctx[j]]++ < it->second) ++overlap;
      const auto len = j - i + 1;
      const auto lhs = overlap * (best_len + g);
      const auto rhs = best_overlap * (len + g);
      if (lhs > rhs) {
        best_i = i;
        best_len = len;
        best_overlap = overlap;
      }
    }
  }
  if (best_overlap == 0) return {};
  std::string out;
  for (std::size_t k = best_i; k < best_i + best_len; ++k) {
    if (!out.empty()) out += ' ';
    out += ctx[k];
  }
  return out;
}

std::string ProviderScorer::extract(const ScorerQuery& q) const {
  const auto prompt = prompts_->render("extract_span", {{"{{QUESTION}}", q.question}, {"{{PASSAGE}}", q.context}});
  const auto payload = provider::extract_structured(client_.complete(prompt).text, {"short_answer"});
  if (!payload["short_answer"].is_string()) throw provider::PayloadError("'short_answer' is not a string");
  return trim(payload["short_answer"].get<std::string>());
}

double disambig_f1(std::string_view long_answer, std::span<const std::string> clarified,
                   std::span<const std::string> gold_shorts, const ExtractiveScorer& scorer,
                   std::vector<std::string>* warnings) {
  if (gold_shorts.empty()) throw EmptyGold();
  if (clarified.size() != gold_shorts.size()) throw LengthMismatch(clarified.size(), gold_shorts.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < clarified.size(); ++i) {
    try {
      const auto span = scorer.extract({clarified[i], std::string(long_answer), gold_shorts[i]});
      sum += token_f1(span, gold_shorts[i]);
    } catch (const provider::AuthError&) {
      throw;
    } catch (const Error& e) {
      auto msg = fmt::format("scorer failed on clarified question {}: {} (scored 0)", i + 1, e.what());
      spdlog::warn("{}", msg);
      if (warnings) warnings->push_back(std::move(msg));
    }
  }
  return sum / static_cast<double>(clarified.size());
}

JudgeScore JudgeScore::from(double r, double f, double i, double c) {
  return {r, f, i, c, (r + f + i + c) / 4.0};
}

nlohmann::json to_json(const JudgeScore& s) {
  return {{"relevance", s.relevance},
          {"faithfulness", s.faithfulness},
          {"informativeness", s.informativeness},
          {"correctness", s.correctness},
          {"overall", s.overall}};
}

JudgeScore judge_from_payload(const nlohmann::json& payload, std::vector<std::string>* warnings) {
  std::array<double, 4> v{};
  const std::array<const char*, 4> keys = {"relevance", "faithfulness", "informativeness", "correctness"};
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (!payload.contains(keys[k])) throw JudgeFormatError(std::string("judge payload lacks '") + keys[k] + "'");
    const auto& x = payload[keys[k]];
    double value = 0;
    if (x.is_number()) {
      value = x.get<double>();
    } else if (x.is_string()) {
      try {
        std::size_t used = 0;
        value = std::stod(x.get<std::string>(), &used);
      } catch (const std::logic_error&) {
        throw JudgeFormatError(std::string("judge score '") + keys[k] + "' is not a number");
      }
    } else {
      throw JudgeFormatError(std::string("judge score '") + keys[k] + "' is not a number");
    }
    if (!std::isfinite(value)) throw JudgeFormatError(std::string("judge score '") + keys[k] + "' is not finite");
    if (value < 0.0 || value > 5.0) {
      auto msg = fmt::format("judge score {}={} clamped to [0, 5]", keys[k], value);
      spdlog::warn("{}", msg);
      if (warnings) warnings->push_back(std::move(msg));
      value = std::clamp(value, 0.0, 5.0);
    }
    v[k] = value;
  }
  return JudgeScore::from(v[0], v[1], v[2], v[3]);
}

JudgeScore judge(std::string_view question, std::string_view predicted_long, std::string_view gold_long,
                 const provider::LlmClient& client, const PromptLibrary& prompts, std::vector<std::string>* warnings) {
  const auto prompt = prompts.render("judge", {{"{{QUESTION}}", std::string(question)},
                                               {"{{GOLD_LONG}}", std::string(gold_long)},
                                               {"{{PREDICTED_LONG}}", std::string(predicted_long)}});
  nlohmann::json payload;
  try {
    payload = provider::extract_structured(client.complete(prompt).text);
  } catch (const provider::PayloadError& e) {
    throw JudgeFormatError(e.what());
  }
  return judge_from_payload(payload, warnings);
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& m : r.per_instance) {
    nlohmann::json row = {{"question_id", m.question_id}, {"str_em", m.str_em * 100.0}, {"disambig_f1", m.disambig_f1 * 100.0}};
    if (m.judge) row["judge"] = to_json(*m.judge);
    per.push_back(std::move(row));
  }
  return {{"n", r.n},
          {"str_em", r.str_em * 100.0},
          {"disambig_f1", r.disambig_f1 * 100.0},
          {"avg", r.avg * 100.0},
          {"judge", r.judge ? to_json(*r.judge) : nlohmann::json(nullptr)},
          {"per_instance", std::move(per)},
          {"warnings", r.warnings}};
}

MetricReport aggregate(std::span<const PredictionRecord> predictions, std::span<const MirageInstance> gold,
                       const AggregateOptions& opts) {
  const LexicalScorer lexical;
  const ExtractiveScorer& scorer = opts.scorer ? *opts.scorer : lexical;
  const PromptLibrary& prompts = opts.prompts ? *opts.prompts : PromptLibrary::bundled();

  std::map<std::string, const MirageInstance*> by_id;
  for (const auto& g : gold) by_id.emplace(g.question.id, &g);

  MetricReport report;
  std::map<std::string, bool> answered;
  double judge_sum[4] = {0, 0, 0, 0};
  std::size_t judged = 0;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.question_id);
    if (it == by_id.end()) throw UnmatchedPrediction(p.question_id);
    if (answered[p.question_id]) throw PreconditionError("duplicate prediction for '" + p.question_id + "'");
    answered[p.question_id] = true;
    const auto& inst = *it->second;

    std::vector<std::string> shorts, clarified;
    for (const auto& s : inst.short_answers) shorts.push_back(s.text);
    for (const auto& c : inst.clarified) clarified.push_back(c.text);

    InstanceMetrics m;
    m.question_id = p.question_id;
    if (p.error) report.warnings.push_back("prediction '" + p.question_id + "' is an error record: " + *p.error);
    m.str_em = str_em(p.long_answer, shorts);
    m.disambig_f1 = disambig_f1(p.long_answer, clarified, shorts, scorer, &report.warnings);
    if (opts.judge) {
      m.judge = judge(inst.question.text, p.long_answer, inst.long_answer, *opts.judge, prompts, &report.warnings);
      judge_sum[0] += m.judge->relevance;
      judge_sum[1] += m.judge->faithfulness;
      judge_sum[2] += m.judge->informativeness;
      judge_sum[3] += m.judge->correctness;
      ++judged;
    }
    report.str_em += m.str_em;
    report.disambig_f1 += m.disambig_f1;
    report.per_instance.push_back(std::move(m));
  }
  for (const auto& g : gold) {
    if (!answered.contains(g.question.id)) {
      auto msg = "gold instance '" + g.question.id + "' has no prediction";
      spdlog::warn("{}", msg);
      report.warnings.push_back(std::move(msg));
    }
  }
  report.n = report.per_instance.size();
  if (report.n > 0) {
    report.str_em /= static_cast<double>(report.n);
    report.disambig_f1 /= static_cast<double>(report.n);
  }
  report.avg = (report.str_em + report.disambig_f1) / 2.0;
  if (judged > 0) {
    const auto d = static_cast<double>(judged);
    report.judge = JudgeScore::from(judge_sum[0] / d, judge_sum[1] / d, judge_sum[2] / d, judge_sum[3] / d);
  }
  return report;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch(x.size(), y.size());
  if (x.size() < 2) throw PreconditionError("correlations need at least two points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw PreconditionError("correlation inputs must be finite");
  }
}

/// Merge sort that counts inversions (strictly greater elements before
/// smaller ones).
std::uint64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const auto mid = lo + (hi - lo) / 2;
  auto swaps = sort_count_swaps(v, tmp, lo, mid) + sort_count_swaps(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += mid - i;
      tmp[k++] = v[j++];
    } else {
      tmp[k++] = v[i++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

/// Sum of t*(t-1)/2 over runs of equal values in a sorted sequence.
template <typename Eq>
std::uint64_t tied_pairs(std::size_t n, Eq&& equal) {
  std::uint64_t total = 0;
  std::uint64_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

nlohmann::json to_json(const CorrelationReport& r) {
  return {{"pearson_r", opt(r.pearson_r)},
          {"spearman_rho", opt(r.spearman_rho)},
          {"kendall_tau_b", opt(r.kendall_tau_b)},
          {"qwk", opt(r.qwk)}};
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const auto n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const auto n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[order[a]] == x[order[b]]; });
  const auto n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });
  std::vector<double> ys(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const auto swaps = sort_count_swaps(ys, tmp, 0, n);
  const auto n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const double denom_x = static_cast<double>(n0 - n1);
  const double denom_y = static_cast<double>(n0 - n2);
  if (denom_x <= 0.0 || denom_y <= 0.0) return std::nullopt;
  // concordant - discordant = n0 - n1 - n2 + n3 - 2 * swaps
  const double numer = static_cast<double>(n0) - static_cast<double>(n1) - static_cast<double>(n2) +
                       static_cast<double>(n3) - 2.0 * static_cast<double>(swaps);
  return std::clamp(numer / std::sqrt(denom_x * denom_y), -1.0, 1.0);
}

int to_grid(double v) {
  if (!std::isfinite(v)) throw PreconditionError("cannot grid a non-finite value");
  return static_cast<int>(std::clamp(std::floor(v + 0.5), 0.0, 5.0));
}

std::optional<double> qwk(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  constexpr int K = 6;
  std::array<std::array<double, K>, K> observed{};
  std::array<double, K> hx{}, hy{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int a = to_grid(x[i]);
    const int b = to_grid(y[i]);
    observed[a][b] += 1.0;
    hx[a] += 1.0;
    hy[b] += 1.0;
  }
  const auto n = static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      const double w = static_cast<double>((i - j) * (i - j)) / ((K - 1) * (K - 1));
      num += w * observed[i][j];
      den += w * hx[i] * hy[j] / n;
    }
  }
  if (den <= 0.0) return std::nullopt;
  return std::clamp(1.0 - num / den, -1.0, 1.0);
}

CorrelationReport correlations(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  return {pearson(x, y), spearman(x, y), kendall_tau_b(x, y), qwk(x, y)};
}

}  // namespace mirage::metrics
