#include "mirage/core/stats.hpp"

#include <numeric>

#include "mirage/core/text.hpp"

namespace mirage {

std::size_t DatasetStats::total() const {
  return std::accumulate(per_type_count.begin(), per_type_count.end(), std::size_t{0});
}

DatasetStats dataset_stats(std::span<const MirageInstance> instances) {
  DatasetStats stats;
  std::array<long long, 3> hop_sum{};
  std::array<std::size_t, 3> hop_n{};
  std::array<long long, 3> len_sum{};
  std::array<std::size_t, 3> len_n{};

  for (const auto& inst : instances) {
    const auto t = type_index(inst.type);
    ++stats.per_type_count[t];
    if (inst.question.hops) {
      hop_sum[t] += *inst.question.hops;
      ++hop_n[t];
    }
    const auto tokens = normalized_tokens(inst.question.text);
    if (!tokens.empty()) {
      len_sum[t] += static_cast<long long>(tokens.size());
      ++len_n[t];
    }
  }
  for (std::size_t t = 0; t < 3; ++t) {
    if (hop_n[t] > 0) stats.avg_hops[t] = static_cast<double>(hop_sum[t]) / static_cast<double>(hop_n[t]);
    if (len_n[t] > 0) {
      stats.avg_question_length[t] = static_cast<double>(len_sum[t]) / static_cast<double>(len_n[t]);
    }
  }
  return stats;
}

nlohmann::json to_json(const DatasetStats& stats) {
  nlohmann::json j = nlohmann::json::object();
  for (auto t : kAmbiguityTypes) {
    const auto key = std::string(to_string(t));
    j["count"][key] = stats.count(t);
    j["avg_hops"][key] = stats.hops(t) ? nlohmann::json(*stats.hops(t)) : nlohmann::json(nullptr);
    j["avg_question_length"][key] =
        stats.question_length(t) ? nlohmann::json(*stats.question_length(t)) : nlohmann::json(nullptr);
  }
  j["total"] = stats.total();
  return j;
}

}  // namespace mirage
