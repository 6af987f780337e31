#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include <json.hpp>

#include "mirage/core/types.hpp"

namespace mirage {

/// Per-type dataset statistics. Question length is measured in whitespace
/// tokens of the normalized question text.
struct DatasetStats {
  std::array<std::size_t, 3> per_type_count{};
  std::array<std::optional<double>, 3> avg_hops{};
  std::array<std::optional<double>, 3> avg_question_length{};

  std::size_t count(AmbiguityType t) const { return per_type_count[type_index(t)]; }
  std::optional<double> hops(AmbiguityType t) const { return avg_hops[type_index(t)]; }
  std::optional<double> question_length(AmbiguityType t) const {
    return avg_question_length[type_index(t)];
  }
  std::size_t total() const;
};

DatasetStats dataset_stats(std::span<const MirageInstance> instances);

nlohmann::json to_json(const DatasetStats& stats);

}  // namespace mirage
