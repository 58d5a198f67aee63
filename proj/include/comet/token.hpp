#pragma once

// Core token types shared by the lexer, edit encoding, features and model.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace comet {

// Every recoverable failure in the library carries one of these codes so that
// callers (tests, CLI) can react to the identity of the failure rather than
// parse message text.
enum class ErrorCode {
  UnbalancedDelimiters,
  EmptyComment,
  NoSignature,
  NoDistinctChange,
  MalformedEditSequence,
  AnchorNotFound,
  EmptyCorpus,
  VocabularyMissing,
  InsufficientProjects,
  BadRecord,
  BadConfig,
  Io,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnbalancedDelimiters: return "UnbalancedDelimiters";
    case ErrorCode::EmptyComment: return "EmptyComment";
    case ErrorCode::NoSignature: return "NoSignature";
    case ErrorCode::NoDistinctChange: return "NoDistinctChange";
    case ErrorCode::MalformedEditSequence: return "MalformedEditSequence";
    case ErrorCode::AnchorNotFound: return "AnchorNotFound";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::VocabularyMissing: return "VocabularyMissing";
    case ErrorCode::InsufficientProjects: return "InsufficientProjects";
    case ErrorCode::BadRecord: return "BadRecord";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

enum class TokenKind : uint8_t {
  Identifier,
  Keyword,
  Operator,
  Literal,
  Punctuation,
  Word,
};

inline const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Operator: return "operator";
    case TokenKind::Literal: return "literal";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Word: return "word";
  }
  return "unknown";
}

// A single (sub)token. When a compound source token such as "camelCase" is
// split, each piece records the original compound text and its 0-based
// position within it; unsplit tokens carry no parent metadata.
struct Token {
  std::string text;
  TokenKind kind = TokenKind::Word;
  std::optional<int> parent_index;
  std::string parent_text;

  Token() = default;
  Token(std::string t, TokenKind k) : text(std::move(t)), kind(k) {}
  Token(std::string t, TokenKind k, int pindex, std::string ptext)
      : text(std::move(t)),
        kind(k),
        parent_index(pindex),
        parent_text(std::move(ptext)) {}

  bool is_subtoken() const { return parent_index.has_value(); }

  friend bool operator==(const Token& a, const Token& b) {
    return a.text == b.text && a.kind == b.kind &&
           a.parent_index == b.parent_index && a.parent_text == b.parent_text;
  }
};

enum class TokenSource : uint8_t { Method, Comment };

struct TokenSeq {
  std::vector<Token> tokens;
  TokenSource source = TokenSource::Method;

  TokenSeq() = default;
  explicit TokenSeq(TokenSource s) : source(s) {}
  TokenSeq(std::vector<Token> t, TokenSource s)
      : tokens(std::move(t)), source(s) {}

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const Token& operator[](size_t i) const { return tokens[i]; }
  Token& operator[](size_t i) { return tokens[i]; }

  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens) out.push_back(t.text);
    return out;
  }

  std::string joined() const {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i].text;
    }
    return out;
  }

  bool same_texts(const TokenSeq& other) const {
    if (tokens.size() != other.tokens.size()) return false;
    for (size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i].text != other.tokens[i].text) return false;
    return true;
  }
};

inline std::vector<std::string> texts_of(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.text);
  return out;
}

inline std::string join_texts(const std::vector<std::string>& texts,
                              char sep = ' ') {
  std::string out;
  for (size_t i = 0; i < texts.size(); ++i) {
    if (i) out += sep;
    out += texts[i];
  }
  return out;
}

}  // namespace comet
