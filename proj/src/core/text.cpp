#include "mirage/core/text.hpp"

#include <cstdint>

#include <fmt/format.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace mirage {
namespace {

bool is_punct_or_symbol(UChar32 c) {
  const auto mask = U_GET_GC_MASK(c);
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

bool is_article(std::string_view tok) {
  return tok == "a" || tok == "an" || tok == "the";
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string normalize_text(std::string_view s) {
  // Pass 1: lowercase and map punctuation / symbols / whitespace to ' '.
  std::string mapped;
  mapped.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0 || is_punct_or_symbol(c) || u_isUWhiteSpace(c) || u_iscntrl(c)) {
      mapped.push_back(' ');
      continue;
    }
    append_utf8(mapped, u_tolower(c));
  }

  // Pass 2: drop articles and collapse spaces.
  std::string out;
  out.reserve(mapped.size());
  std::size_t pos = 0;
  while (pos < mapped.size()) {
    while (pos < mapped.size() && mapped[pos] == ' ') ++pos;
    const auto start = pos;
    while (pos < mapped.size() && mapped[pos] != ' ') ++pos;
    if (start == pos) break;
    const std::string_view tok(mapped.data() + start, pos - start);
    if (is_article(tok)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(tok);
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    auto next = normalized.find(' ', pos);
    if (next == std::string_view::npos) next = normalized.size();
    if (next > pos) tokens.emplace_back(normalized.substr(pos, next - pos));
    pos = next + 1;
  }
  return tokens;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  return split_tokens(normalize_text(s));
}

namespace {
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string utf8_prefix(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return std::string(s);
  std::size_t cut = max_bytes;
  // Back up over continuation bytes (10xxxxxx).
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return std::string(s.substr(0, cut));
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace mirage
