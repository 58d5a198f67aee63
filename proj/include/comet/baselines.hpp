#pragma once

// Rule-based comment-update baselines: verbatim copy, return-type
// substitution, and return-type substitution with a null-behavior note.

#include <optional>
#include <string>
#include <vector>

#include "comet/corpus.hpp"
#include "comet/lexer.hpp"
#include "comet/token.hpp"

namespace comet {

inline TokenSeq copy_baseline(const Example& e) { return e.c_old; }

namespace baseline_detail {

inline std::optional<std::vector<std::string>> try_return_type(
    const TokenSeq& m) {
  try {
    return extract_return_type(m);
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline Token word_token(const std::string& text) {
  Token t;
  t.text = text;
  t.kind = TokenKind::Word;
  return t;
}

// True when "null" occurs inside any return statement or if statement.
inline bool mentions_null_in_return_or_if(const TokenSeq& m) {
  for (const auto& stmt : extract_return_statements(m))
    for (const Token& t : stmt)
      if (t.text == "null") return true;
  for (const Token& t : extract_if_region_tokens(m))
    if (t.text == "null") return true;
  return false;
}

}  // namespace baseline_detail

// Replaces every occurrence of the old return type's subtoken span in C_old
// with the new return type; copies C_old when the type is unchanged, missing,
// or absent from the comment.
inline TokenSeq return_type_subst(const Example& e) {
  using namespace baseline_detail;
  auto type_old = try_return_type(e.m_old);
  auto type_new = try_return_type(e.m_new);
  if (!type_old || !type_new || *type_old == *type_new || type_old->empty())
    return e.c_old;

  const std::vector<std::string>& pattern = *type_old;
  std::vector<std::string> texts = e.c_old.texts();
  TokenSeq out(TokenSource::Comment);
  bool changed = false;
  size_t i = 0;
  while (i < texts.size()) {
    bool match = i + pattern.size() <= texts.size();
    for (size_t k = 0; match && k < pattern.size(); ++k)
      if (texts[i + k] != pattern[k]) match = false;
    if (match) {
      for (const std::string& t : *type_new)
        out.tokens.push_back(word_token(t));
      i += pattern.size();
      changed = true;
    } else {
      out.tokens.push_back(e.c_old.tokens[i]);
      ++i;
    }
  }
  return changed ? out : e.c_old;
}

// return_type_subst plus: when the new method can newly return/handle null
// (token "null" inside a return or if statement of M_new but not of M_old),
// appends "or null if null" before a trailing period.
inline TokenSeq return_type_subst_null(const Example& e) {
  using namespace baseline_detail;
  TokenSeq out = return_type_subst(e);
  bool null_old = mentions_null_in_return_or_if(e.m_old);
  bool null_new = mentions_null_in_return_or_if(e.m_new);
  if (!null_new || null_old) return out;

  std::vector<Token> note = {word_token("or"), word_token("null"),
                             word_token("if"), word_token("null")};
  size_t insert_at = out.tokens.size();
  if (!out.tokens.empty() && out.tokens.back().text == ".")
    insert_at = out.tokens.size() - 1;
  out.tokens.insert(out.tokens.begin() + static_cast<long>(insert_at),
                    note.begin(), note.end());
  return out;
}

inline TokenSeq run_baseline(const std::string& name, const Example& e) {
  if (name == "copy") return copy_baseline(e);
  if (name == "rts") return return_type_subst(e);
  if (name == "rts-null") return return_type_subst_null(e);
  throw Error(ErrorCode::BadConfig, "unknown baseline: " + name);
}

}  // namespace comet
