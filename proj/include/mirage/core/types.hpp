#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mirage {

enum class AmbiguityType { Syntactic, General, Semantic };

/// Fixed expansion order used wherever types are enumerated.
inline constexpr std::array<AmbiguityType, 3> kAmbiguityTypes = {
    AmbiguityType::Syntactic, AmbiguityType::General, AmbiguityType::Semantic};

inline constexpr std::size_t type_index(AmbiguityType t) noexcept {
  return static_cast<std::size_t>(t);
}

std::string_view to_string(AmbiguityType t) noexcept;

/// Parses "syntactic" | "general" | "semantic" (case-insensitive). Anything
/// else, including "none", yields nullopt.
std::optional<AmbiguityType> parse_ambiguity_type(std::string_view s);

struct Question {
  std::string id;
  std::string text;
  std::optional<int> hops;
};

struct ClarifiedQuestion {
  std::string parent_id;
  AmbiguityType type = AmbiguityType::Semantic;
  std::string text;
  int index = 1;  // 1-based
};

struct Passage {
  std::string doc_id;
  std::string title;
  std::string text;

  bool operator==(const Passage&) const = default;
};

struct ShortAnswer {
  int clarified_index = 1;
  std::string text;
  std::string support_passage_id;
};

struct MirageInstance {
  Question question;
  AmbiguityType type = AmbiguityType::Semantic;
  std::vector<ClarifiedQuestion> clarified;
  std::vector<ShortAnswer> short_answers;
  std::vector<Passage> evidence;
  std::string long_answer;
  /// Fields of the source record this schema does not know about; written
  /// back verbatim on serialization.
  nlohmann::json extra = nlohmann::json::object();
};

}  // namespace mirage
