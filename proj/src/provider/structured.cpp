#include "mirage/provider/structured.hpp"

#include "mirage/core/text.hpp"

namespace mirage::provider {

std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(std::string_view text,
                                                                        std::size_t from) {
  for (auto open = text.find('{', from); open != std::string_view::npos; open = text.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return std::make_pair(open, i + 1);
      }
    }
    // This `{` never closes; later ones are nested inside it or after an
    // unterminated string, so keep scanning from the next candidate.
  }
  return std::nullopt;
}

nlohmann::json extract_structured(std::string_view text, const std::vector<std::string>& required_keys) {
  std::optional<ParseError> first_error;
  std::size_t from = 0;
  while (auto range = find_balanced_object(text, from)) {
    const auto [begin, end] = *range;
    try {
      auto value = nlohmann::json::parse(text.substr(begin, end - begin));
      for (const auto& key : required_keys) {
        if (!value.contains(key)) throw MissingKey(key);
      }
      return value;
    } catch (const nlohmann::json::parse_error& e) {
      if (!first_error) first_error.emplace(begin + e.byte, e.what());
    }
    from = begin + 1;
  }
  if (first_error) throw *first_error;
  throw NoPayload();
}

std::optional<nlohmann::json> try_extract_structured(std::string_view text,
                                                     const std::vector<std::string>& required_keys) {
  try {
    return extract_structured(text, required_keys);
  } catch (const PayloadError&) {
    return std::nullopt;
  }
}

std::optional<bool> parse_yes_no(const nlohmann::json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (!v.is_string()) return std::nullopt;
  const auto s = to_lower_ascii(trim(v.get<std::string>()));
  if (s == "y" || s == "yes" || s == "true") return true;
  if (s == "n" || s == "no" || s == "false") return false;
  return std::nullopt;
}

}  // namespace mirage::provider
