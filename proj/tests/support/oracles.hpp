#pragma once

// Brute-force reference implementations used by the unit tests and the
// acceptance harness. They share no code with the library: normalization here
// only handles ASCII, and every statistic is computed the slow, obvious way.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::string normalize_ascii(const std::string& s) {
  std::string spaced;
  for (unsigned char c : s) spaced += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : ' ';
  std::istringstream in(spaced);
  std::string tok, out;
  while (in >> tok) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

inline std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(normalize_ascii(s));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline bool contains_tokens(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty()) return true;
  if (needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

// Substring containment on the normalized strings.
inline double str_em(const std::string& long_answer, const std::vector<std::string>& gold) {
  const auto hay = normalize_ascii(long_answer);
  std::size_t hit = 0;
  for (const auto& g : gold) {
    if (hay.find(normalize_ascii(g)) != std::string::npos) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

inline std::size_t multiset_overlap(std::vector<std::string> a, std::vector<std::string> b) {
  std::size_t overlap = 0;
  for (const auto& t : a) {
    auto it = std::find(b.begin(), b.end(), t);
    if (it != b.end()) {
      ++overlap;
      b.erase(it);
    }
  }
  return overlap;
}

inline double token_f1_tokens(const std::vector<std::string>& p, const std::vector<std::string>& g) {
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  const auto o = multiset_overlap(p, g);
  if (o == 0) return 0.0;
  return 2.0 * static_cast<double>(o) / static_cast<double>(p.size() + g.size());
}

inline double token_f1(const std::string& pred, const std::string& gold) {
  return token_f1_tokens(tokens(pred), tokens(gold));
}

// Every window recomputed from scratch; keeps the first strictly better one,
// scanning starts ascending and lengths ascending.
inline std::string best_window(const std::string& context, const std::string& gold) {
  const auto ctx = tokens(context);
  const auto g = tokens(gold);
  if (ctx.empty() || g.empty()) return {};
  double best = 0.0;
  std::size_t bi = 0, bl = 0;
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    for (std::size_t len = 1; i + len <= ctx.size(); ++len) {
      std::vector<std::string> w(ctx.begin() + static_cast<std::ptrdiff_t>(i),
                                 ctx.begin() + static_cast<std::ptrdiff_t>(i + len));
      const auto o = multiset_overlap(w, g);
      const double f = 2.0 * static_cast<double>(o) / static_cast<double>(len + g.size());
      if (f > best) {
        best = f;
        bi = i;
        bl = len;
      }
    }
  }
  if (bl == 0) return {};
  std::string out;
  for (std::size_t k = bi; k < bi + bl; ++k) {
    if (!out.empty()) out += ' ';
    out += ctx[k];
  }
  return out;
}

inline double disambig_f1_lexical(const std::string& long_answer, const std::vector<std::string>& gold) {
  double sum = 0.0;
  for (const auto& g : gold) sum += token_f1(best_window(long_answer, g), g);
  return sum / static_cast<double>(gold.size());
}

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

inline std::optional<double> kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double d1 = concordant + discordant + tie_x;
  const double d2 = concordant + discordant + tie_y;
  if (d1 == 0 || d2 == 0) return std::nullopt;
  return (concordant - discordant) / std::sqrt(d1 * d2);
}

inline int grid(double v) {
  const int r = static_cast<int>(std::floor(v + 0.5));
  return std::clamp(r, 0, 5);
}

// Closed form: 1 - sum (a_i - b_i)^2 / ((1/n) sum_i sum_j (a_i - b_j)^2).
inline std::optional<double> qwk(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double observed = 0, expected = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = grid(x[i]) - grid(y[i]);
    observed += d * d;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = grid(x[i]) - grid(y[j]);
      expected += e * e;
    }
  }
  expected /= static_cast<double>(n);
  if (expected == 0) return std::nullopt;
  return 1.0 - observed / expected;
}

}  // namespace oracle
