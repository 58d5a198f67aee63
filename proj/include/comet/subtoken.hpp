#pragma once

// Compound-token splitting: camelCase / snake_case / letter-digit boundaries.

#include <cctype>
#include <string>
#include <vector>

#include "comet/token.hpp"

namespace comet {

namespace detail {
inline bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)); }
inline bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)); }
inline bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }
inline bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
inline char to_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}
}  // namespace detail

inline std::string lowercased(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = detail::to_lower(c);
  return out;
}

struct SubtokenSplit {
  // Lowercased pieces, in order.
  std::vector<std::string> pieces;
  // True when the original text was actually split (several pieces, or a
  // single piece that differs from the lowercased original, e.g. "_x").
  bool split = false;
};

// Splits a compound token at underscores, lower/digit->upper boundaries,
// ALLCAPS->CapWord boundaries ("HTMLParser" -> html parser) and
// letter<->digit transitions ("utf8" -> utf 8). Pieces are lowercased.
inline SubtokenSplit subtokenize(const std::string& text) {
  using namespace detail;
  SubtokenSplit out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.pieces.push_back(cur);
      cur.clear();
    }
  };
  const size_t n = text.size();
  for (size_t i = 0; i < n; ++i) {
    char c = text[i];
    if (c == '_') {
      flush();
      continue;
    }
    if (!cur.empty()) {
      char prev = text[i - 1];
      bool boundary = false;
      if (prev != '_') {
        if ((is_lower(prev) || is_digit(prev)) && is_upper(c)) boundary = true;
        if (is_upper(prev) && is_upper(c) && i + 1 < n && is_lower(text[i + 1]))
          boundary = true;
        if (is_alpha(prev) && is_digit(c)) boundary = true;
        if (is_digit(prev) && is_alpha(c)) boundary = true;
      }
      if (boundary) flush();
    }
    cur += to_lower(c);
  }
  flush();
  if (out.pieces.empty()) out.pieces.push_back(lowercased(text));
  out.split =
      out.pieces.size() > 1 || out.pieces.front() != lowercased(text);
  return out;
}

// Expands `text` into Tokens of the given kind, attaching parent metadata
// when the text was split or normalized.
inline std::vector<Token> subtoken_tokens(const std::string& text,
                                          TokenKind kind) {
  SubtokenSplit s = subtokenize(text);
  std::vector<Token> out;
  out.reserve(s.pieces.size());
  if (!s.split) {
    out.emplace_back(s.pieces.front(), kind);
    return out;
  }
  for (size_t i = 0; i < s.pieces.size(); ++i)
    out.emplace_back(s.pieces[i], kind, static_cast<int>(i), text);
  return out;
}

}  // namespace comet
