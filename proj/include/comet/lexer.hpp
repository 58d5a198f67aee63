#pragma once

// Pragmatic Java-flavoured lexer for method bodies plus a Javadoc-style
// comment tokenizer, and the signature/return-statement extractors built on
// top of the token stream.

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "comet/subtoken.hpp"
#include "comet/token.hpp"

namespace comet {

inline const std::unordered_set<std::string>& java_keywords() {
  static const std::unordered_set<std::string> kw = {
      "abstract", "assert",    "boolean",  "break",      "byte",
      "case",     "catch",     "char",     "class",      "const",
      "continue", "default",   "do",       "double",     "else",
      "enum",     "extends",   "final",    "finally",    "float",
      "for",      "goto",      "if",       "implements", "import",
      "instanceof", "int",     "interface", "long",      "native",
      "new",      "package",   "private",  "protected",  "public",
      "return",   "short",     "static",   "strictfp",   "super",
      "switch",   "synchronized", "this",  "throw",      "throws",
      "transient", "try",      "void",     "volatile",   "while",
      "true",     "false",     "null",     "var",        "record",
  };
  return kw;
}

inline bool is_java_keyword(const std::string& s) {
  return java_keywords().count(s) > 0;
}

namespace detail {

inline bool is_ident_start(char c) {
  return is_alpha(c) || c == '_' || c == '$';
}
inline bool is_ident_char(char c) {
  return is_alpha(c) || is_digit(c) || c == '_' || c == '$';
}

inline const std::vector<std::string>& multi_char_operators() {
  static const std::vector<std::string> ops = {
      ">>>=", "<<=", ">>=", ">>>", "->", "::", "++", "--", "<<", ">>",
      "<=",  ">=",  "==",  "!=",  "&&", "||", "+=", "-=", "*=", "/=",
      "%=",  "&=",  "|=",  "^=",
  };
  return ops;
}

inline bool is_single_operator(char c) {
  static const std::string singles = "+-*/%=<>!&|^~?:";
  return singles.find(c) != std::string::npos;
}

inline bool is_punct_char(char c) {
  static const std::string puncts = "(){}[];,.@";
  return puncts.find(c) != std::string::npos;
}

}  // namespace detail

// Lexes Java-like source into subtoken-level tokens. Comments are dropped,
// string/char literals stay single tokens (quotes retained), identifiers are
// split into lowercase subtokens carrying parent metadata. Unbalanced
// ( ) [ ] { } or an unterminated literal raise UnbalancedDelimiters.
inline TokenSeq lex_method(const std::string& src) {
  using namespace detail;
  TokenSeq out(TokenSource::Method);
  std::vector<char> stack;
  const size_t n = src.size();
  size_t i = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::UnbalancedDelimiters, msg);
  };
  while (i < n) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // Comments.
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      size_t end = src.find("*/", i + 2);
      i = (end == std::string::npos) ? n : end + 2;
      continue;
    }
    // String / char literals.
    if (c == '"' || c == '\'') {
      char quote = c;
      size_t start = i++;
      bool closed = false;
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n) {
          i += 2;
          continue;
        }
        if (src[i] == quote) {
          closed = true;
          ++i;
          break;
        }
        ++i;
      }
      if (!closed) fail("unterminated literal");
      out.tokens.emplace_back(src.substr(start, i - start), TokenKind::Literal);
      continue;
    }
    // Numeric literals (pragmatic: digits, hex, underscores, exponent signs,
    // type suffixes, and a leading dot handled by falling through from '.').
    if (is_digit(c)) {
      size_t start = i++;
      while (i < n) {
        char d = src[i];
        if (is_digit(d) || is_alpha(d) || d == '_' || d == '.') {
          ++i;
          continue;
        }
        if ((d == '+' || d == '-') && i > start) {
          char prev = src[i - 1];
          if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
            ++i;
            continue;
          }
        }
        break;
      }
      out.tokens.emplace_back(src.substr(start, i - start), TokenKind::Literal);
      continue;
    }
    // Identifiers and keywords.
    if (is_ident_start(c)) {
      size_t start = i++;
      while (i < n && is_ident_char(src[i])) ++i;
      std::string word = src.substr(start, i - start);
      if (is_java_keyword(word)) {
        out.tokens.emplace_back(word, TokenKind::Keyword);
      } else {
        for (Token& t : subtoken_tokens(word, TokenKind::Identifier))
          out.tokens.push_back(std::move(t));
      }
      continue;
    }
    // Multi-character operators (longest match).
    bool matched = false;
    for (const std::string& op : multi_char_operators()) {
      if (src.compare(i, op.size(), op) == 0) {
        out.tokens.emplace_back(op, TokenKind::Operator);
        i += op.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (is_single_operator(c)) {
      out.tokens.emplace_back(std::string(1, c), TokenKind::Operator);
      ++i;
      continue;
    }
    if (is_punct_char(c)) {
      if (c == '(' || c == '[' || c == '{') stack.push_back(c);
      if (c == ')' || c == ']' || c == '}') {
        char open = c == ')' ? '(' : (c == ']' ? '[' : '{');
        if (stack.empty() || stack.back() != open)
          fail(std::string("unmatched '") + c + "'");
        stack.pop_back();
      }
      out.tokens.emplace_back(std::string(1, c), TokenKind::Punctuation);
      ++i;
      continue;
    }
    // Anything else: keep as single-character punctuation.
    out.tokens.emplace_back(std::string(1, c), TokenKind::Punctuation);
    ++i;
  }
  if (!stack.empty()) fail(std::string("unclosed '") + stack.back() + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Comment tokenization.
// ---------------------------------------------------------------------------

namespace detail {

// Strips well-formed HTML tags and decodes the common entities.
inline std::string strip_html(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    if (s[i] == '<' && i + 1 < n) {
      size_t j = i + 1;
      if (j < n && s[j] == '/') ++j;
      if (j < n && is_alpha(s[j])) {
        size_t close = s.find('>', j);
        size_t nl = s.find('\n', j);
        if (close != std::string::npos &&
            (nl == std::string::npos || close < nl)) {
          i = close + 1;
          out += ' ';
          continue;
        }
      }
    }
    if (s[i] == '&') {
      static const std::vector<std::pair<std::string, std::string>> entities =
          {{"&lt;", "<"}, {"&gt;", ">"}, {"&amp;", "&"},
           {"&quot;", "\""}, {"&nbsp;", " "}, {"&#39;", "'"}};
      bool hit = false;
      for (const auto& [ent, rep] : entities) {
        if (s.compare(i, ent.size(), ent) == 0) {
          out += rep;
          i += ent.size();
          hit = true;
          break;
        }
      }
      if (hit) continue;
    }
    out += s[i++];
  }
  return out;
}

// Removes Javadoc furniture: /** */ fences and leading per-line asterisks.
inline std::string strip_javadoc_frame(const std::string& s) {
  std::string t = s;
  auto replace_all = [](std::string& str, const std::string& from,
                        const std::string& to) {
    size_t pos = 0;
    while ((pos = str.find(from, pos)) != std::string::npos) {
      str.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all(t, "/**", " ");
  replace_all(t, "*/", " ");
  std::string out;
  out.reserve(t.size());
  bool at_line_start = true;
  for (size_t i = 0; i < t.size(); ++i) {
    char c = t[i];
    if (at_line_start) {
      if (c == ' ' || c == '\t') {
        out += c;
        continue;
      }
      if (c == '*') {
        out += ' ';
        at_line_start = false;
        continue;
      }
      at_line_start = false;
    }
    if (c == '\n') at_line_start = true;
    out += c;
  }
  return out;
}

}  // namespace detail

// Tokenizes a @return comment: strips HTML tags and Javadoc framing, drops
// the leading "@return" tag, splits on whitespace and punctuation (retained
// as tokens), subtokenizes compound words and lowercases everything.
// Raises EmptyComment when nothing remains.
inline TokenSeq tokenize_comment(const std::string& raw) {
  using namespace detail;
  std::string s = strip_html(strip_javadoc_frame(raw));
  // Drop the leading Javadoc tag if present.
  size_t p = s.find_first_not_of(" \t\r\n");
  if (p != std::string::npos) {
    for (const char* tag : {"@returns", "@return"}) {
      size_t len = std::string(tag).size();
      if (s.compare(p, len, tag) == 0) {
        s = s.substr(p + len);
        break;
      }
    }
  }
  TokenSeq out(TokenSource::Comment);
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (is_ident_char(c)) {
      size_t start = i;
      while (i < n && is_ident_char(s[i])) ++i;
      for (Token& t :
           subtoken_tokens(s.substr(start, i - start), TokenKind::Word))
        out.tokens.push_back(std::move(t));
      continue;
    }
    out.tokens.emplace_back(std::string(1, c), TokenKind::Punctuation);
    ++i;
  }
  if (out.tokens.empty())
    throw Error(ErrorCode::EmptyComment, "comment has no tokens");
  return out;
}

// ---------------------------------------------------------------------------
// Signature helpers. Tokens are grouped back into source-level "units" (a
// compound identifier is one unit) so positional reasoning matches the code.
// ---------------------------------------------------------------------------

struct TokenUnit {
  size_t begin = 0, end = 0;  // token index range [begin, end)
  std::string text;           // original-unit text (parent text for splits)
  TokenKind kind = TokenKind::Word;
};

inline std::vector<TokenUnit> token_units(const TokenSeq& seq) {
  std::vector<TokenUnit> units;
  size_t i = 0;
  const auto& toks = seq.tokens;
  while (i < toks.size()) {
    TokenUnit u;
    u.begin = i;
    if (toks[i].is_subtoken()) {
      u.text = toks[i].parent_text;
      u.kind = toks[i].kind;
      size_t j = i;
      // A spliced stream (e.g. reconstructed from edit spans) may start a
      // run mid-identifier; begin at the token's own index so the run is
      // grouped maximally and the loop always advances.
      int expect = *toks[i].parent_index;
      while (j < toks.size() && toks[j].is_subtoken() &&
             toks[j].parent_text == u.text && *toks[j].parent_index == expect) {
        ++j;
        ++expect;
      }
      u.end = j;
    } else {
      u.text = toks[i].text;
      u.kind = toks[i].kind;
      u.end = i + 1;
    }
    i = u.end;
    units.push_back(std::move(u));
  }
  return units;
}

namespace detail {

inline bool is_modifier_keyword(const std::string& s) {
  static const std::unordered_set<std::string> mods = {
      "public", "private", "protected", "static",   "final",
      "abstract", "synchronized", "native", "strictfp", "default",
      "transient", "volatile"};
  return mods.count(s) > 0;
}

inline bool is_type_keyword(const std::string& s) {
  static const std::unordered_set<std::string> t = {
      "int",  "long", "short", "byte",   "char",
      "float", "double", "boolean", "void", "var"};
  return t.count(s) > 0;
}

struct SignaturePos {
  size_t name_unit;   // unit index of the method name
  size_t paren_unit;  // unit index of the signature '('
};

// Finds the method name: the identifier unit immediately before the first
// top-level '(' that is not part of an annotation.
inline std::optional<SignaturePos> find_signature(
    const std::vector<TokenUnit>& units) {
  int depth = 0;
  for (size_t u = 0; u < units.size(); ++u) {
    const std::string& t = units[u].text;
    if (t == "(" && depth == 0 && u > 0) {
      const TokenUnit& prev = units[u - 1];
      bool annotated = u >= 2 && units[u - 2].text == "@";
      if (prev.kind == TokenKind::Identifier && !annotated)
        return SignaturePos{u - 1, u};
      // Annotation arguments: skip the group and keep scanning.
    }
    if (t == "(" || t == "[" || t == "{") ++depth;
    if (t == ")" || t == "]" || t == "}") --depth;
    if (t == "{" && depth == 1) break;  // body reached without a signature
  }
  return std::nullopt;
}

}  // namespace detail

// Extracts the return type of the first method signature as lowercase
// subtokens (punctuation dropped, generic arguments included). Raises
// NoSignature when no method signature or no type before the name exists.
inline std::vector<std::string> extract_return_type(const TokenSeq& method) {
  using namespace detail;
  std::vector<TokenUnit> units = token_units(method);
  auto sig = find_signature(units);
  if (!sig)
    throw Error(ErrorCode::NoSignature, "no method signature found");
  size_t name = sig->name_unit;
  if (name == 0)
    throw Error(ErrorCode::NoSignature, "no return type before method name");
  // Walk backwards over the type expression: arrays, generics, qualifiers.
  size_t end = name;        // exclusive unit end of the type region
  size_t begin = name;      // inclusive start, to be discovered
  size_t u = name;          // cursor, moves left
  auto step_back = [&]() -> bool {
    if (u == 0) return false;
    --u;
    return true;
  };
  if (!step_back()) throw Error(ErrorCode::NoSignature, "no type");
  // Array suffixes.
  while (units[u].text == "]") {
    int depth = 1;
    while (depth > 0) {
      if (!step_back())
        throw Error(ErrorCode::NoSignature, "malformed array type");
      if (units[u].text == "]") ++depth;
      if (units[u].text == "[") --depth;
    }
    if (!step_back()) throw Error(ErrorCode::NoSignature, "no element type");
  }
  // Generic argument list. The lexer emits ">>" as a single shift operator,
  // so angle depth is counted per character over all-'>' / all-'<' units.
  auto angle_chars = [](const std::string& t, char c) -> int {
    if (t.empty()) return 0;
    for (char x : t)
      if (x != c) return 0;
    return static_cast<int>(t.size());
  };
  if (int closes = angle_chars(units[u].text, '>')) {
    int depth = closes;
    while (depth > 0) {
      if (!step_back())
        throw Error(ErrorCode::NoSignature, "malformed generic type");
      depth += angle_chars(units[u].text, '>');
      depth -= angle_chars(units[u].text, '<');
    }
    if (!step_back()) throw Error(ErrorCode::NoSignature, "no base type");
  }
  // Base type name.
  if (!(units[u].kind == TokenKind::Identifier ||
        (units[u].kind == TokenKind::Keyword && is_type_keyword(units[u].text))))
    throw Error(ErrorCode::NoSignature, "no type before method name");
  begin = u;
  // Dotted qualifiers: a.b.C
  while (begin >= 2 && units[begin - 1].text == "." &&
         units[begin - 2].kind == TokenKind::Identifier)
    begin -= 2;
  std::vector<std::string> out;
  for (size_t k = begin; k < end; ++k) {
    for (size_t t = units[k].begin; t < units[k].end; ++t) {
      const Token& tok = method.tokens[t];
      if (tok.kind == TokenKind::Identifier || tok.kind == TokenKind::Keyword)
        out.push_back(tok.text);
    }
  }
  if (out.empty())
    throw Error(ErrorCode::NoSignature, "empty return type");
  return out;
}

// Extracts every return statement's expression tokens: the tokens between
// each `return` keyword and its closing `;` (both exclusive, nesting-aware).
inline std::vector<std::vector<Token>> extract_return_statements(
    const TokenSeq& method) {
  std::vector<std::vector<Token>> out;
  const auto& toks = method.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Keyword || toks[i].text != "return")
      continue;
    std::vector<Token> span;
    int depth = 0;
    for (size_t j = i + 1; j < toks.size(); ++j) {
      const std::string& t = toks[j].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      if (t == ")" || t == "]" || t == "}") {
        if (depth == 0) break;  // malformed; stop at enclosing close
        --depth;
      }
      if (t == ";" && depth == 0) break;
      span.push_back(toks[j]);
    }
    out.push_back(std::move(span));
  }
  return out;
}

// Tokens appearing inside if-condition parentheses and the attached
// statement/block, for null-check style heuristics.
inline std::vector<Token> extract_if_region_tokens(const TokenSeq& method) {
  std::vector<Token> out;
  const auto& toks = method.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::Keyword || toks[i].text != "if") continue;
    size_t j = i + 1;
    if (j >= toks.size() || toks[j].text != "(") continue;
    int depth = 0;
    size_t k = j;
    for (; k < toks.size(); ++k) {
      if (toks[k].text == "(") ++depth;
      if (toks[k].text == ")") {
        --depth;
        if (depth == 0) break;
      }
      if (k > j) out.push_back(toks[k]);
    }
    if (k >= toks.size()) continue;
    size_t body = k + 1;
    if (body < toks.size() && toks[body].text == "{") {
      int bdepth = 0;
      for (size_t m = body; m < toks.size(); ++m) {
        if (toks[m].text == "{") ++bdepth;
        if (toks[m].text == "}") {
          --bdepth;
          if (bdepth == 0) break;
        }
        if (m > body) out.push_back(toks[m]);
      }
    } else {
      for (size_t m = body; m < toks.size(); ++m) {
        if (toks[m].text == ";") break;
        out.push_back(toks[m]);
      }
    }
  }
  return out;
}

// Method name as the original compound text (e.g. "getRotX").
inline std::string method_name(const TokenSeq& method) {
  std::vector<TokenUnit> units = token_units(method);
  auto sig = detail::find_signature(units);
  if (!sig)
    throw Error(ErrorCode::NoSignature, "no method signature found");
  return units[sig->name_unit].text;
}

}  // namespace comet
