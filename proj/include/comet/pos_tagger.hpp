#pragma once

// Coarse part-of-speech tagging: a small embedded lexicon plus suffix rules,
// behind a pluggable interface so a richer tagger can be swapped in.

#include <string>
#include <unordered_map>

#include "comet/token.hpp"

namespace comet {

enum class PosTag : uint8_t {
  Noun,
  Verb,
  Adj,
  Adv,
  Det,
  Prep,
  Pron,
  Num,
  Punct,
  Other,
};

inline const char* pos_tag_name(PosTag t) {
  switch (t) {
    case PosTag::Noun: return "NOUN";
    case PosTag::Verb: return "VERB";
    case PosTag::Adj: return "ADJ";
    case PosTag::Adv: return "ADV";
    case PosTag::Det: return "DET";
    case PosTag::Prep: return "PREP";
    case PosTag::Pron: return "PRON";
    case PosTag::Num: return "NUM";
    case PosTag::Punct: return "PUNCT";
    case PosTag::Other: return "OTHER";
  }
  return "?";
}

class PosTaggerInterface {
 public:
  virtual ~PosTaggerInterface() = default;
  virtual PosTag tag(const std::string& lowercase_text,
                     TokenKind kind) const = 0;
};

class RulePosTagger final : public PosTaggerInterface {
 public:
  PosTag tag(const std::string& text, TokenKind kind) const override {
    if (kind == TokenKind::Punctuation || kind == TokenKind::Operator)
      return PosTag::Punct;
    if (text.empty()) return PosTag::Other;
    auto it = lexicon().find(text);
    if (it != lexicon().end()) return it->second;
    bool all_digit = true;
    for (char c : text)
      if (!std::isdigit(static_cast<unsigned char>(c))) all_digit = false;
    if (all_digit) return PosTag::Num;
    bool alphabetic = true;
    for (char c : text)
      if (!std::isalpha(static_cast<unsigned char>(c))) alphabetic = false;
    if (!alphabetic) return PosTag::Other;
    return suffix_tag(text);
  }

 private:
  static PosTag suffix_tag(const std::string& w) {
    auto ends = [&](const char* s) {
      std::string suf(s);
      return w.size() > suf.size() &&
             w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends("ly")) return PosTag::Adv;
    if (ends("ing") || ends("ize") || ends("ise") || ends("ify"))
      return PosTag::Verb;
    if (ends("ed") && w.size() > 3) return PosTag::Verb;
    if (ends("tion") || ends("sion") || ends("ment") || ends("ness") ||
        ends("ity") || ends("ance") || ends("ence") || ends("ship") ||
        ends("er") || ends("or"))
      return PosTag::Noun;
    if (ends("able") || ends("ible") || ends("ful") || ends("less") ||
        ends("ous") || ends("ive") || ends("ic") || ends("al") ||
        ends("est"))
      return PosTag::Adj;
    return PosTag::Noun;
  }

  static const std::unordered_map<std::string, PosTag>& lexicon() {
    static const std::unordered_map<std::string, PosTag> lex = [] {
      std::unordered_map<std::string, PosTag> m;
      auto add = [&](PosTag t, std::initializer_list<const char*> ws) {
        for (const char* w : ws) m[w] = t;
      };
      add(PosTag::Det, {"the", "a", "an", "this", "that", "these", "those",
                        "each", "every", "either", "neither", "both", "all",
                        "any", "some", "no", "such"});
      add(PosTag::Prep,
          {"of", "in", "to", "for", "with", "on", "at", "by", "from",
           "about", "as", "into", "through", "after", "over", "between",
           "against", "during", "without", "before", "under", "around",
           "among", "above", "below", "off", "per", "within", "via",
           "until", "upon"});
      add(PosTag::Pron, {"i", "you", "he", "she", "it", "we", "they", "me",
                         "him", "her", "us", "them", "its", "his", "hers",
                         "their", "theirs", "my", "your", "our", "itself",
                         "something", "anything", "nothing", "everything",
                         "which", "what", "who", "whose"});
      add(PosTag::Verb,
          {"is", "are", "was", "were", "be", "been", "being", "am", "has",
           "have", "had", "having", "do", "does", "did", "done", "will",
           "would", "can", "could", "shall", "should", "may", "might",
           "must", "get", "gets", "got", "return", "returns", "returned",
           "returning", "set", "sets", "contains", "contain", "holds",
           "hold", "gives", "give", "creates", "create", "computes",
           "compute", "checks", "check", "indicates", "indicate",
           "represents", "represent", "specifies", "specify", "denotes",
           "denote", "determines", "determine", "uses", "use", "throws",
           "throw", "converts", "convert", "retrieves", "retrieve",
           "finds", "find", "builds", "build", "adds", "add", "removes",
           "remove", "tests", "test", "means", "mean", "equals", "equal"});
      add(PosTag::Adv,
          {"not", "only", "also", "very", "too", "n't", "never", "always",
           "often", "currently", "newly", "previously", "successfully",
           "otherwise", "however", "here", "there", "now", "then", "when",
           "where", "how", "why", "up", "down", "out", "yet", "already",
           "instead", "rather", "just"});
      add(PosTag::Adj,
          {"new", "old", "true", "false", "null", "empty", "first", "last",
           "next", "previous", "current", "given", "specified", "maximum",
           "minimum", "max", "min", "valid", "invalid", "same", "different",
           "available", "non", "default", "more", "most", "less", "least",
           "other", "whole", "single", "double", "long", "short", "high",
           "low", "deep", "good", "bad", "many", "few", "several", "own"});
      add(PosTag::Num,
          {"zero", "one", "two", "three", "four", "five", "six", "seven",
           "eight", "nine", "ten"});
      add(PosTag::Other, {"and", "or", "but", "if", "because", "while",
                          "whether", "so", "than", "e", "g", "etc"});
      return m;
    }();
    return lex;
  }
};

inline const PosTaggerInterface& default_pos_tagger() {
  static const RulePosTagger tagger;
  return tagger;
}

inline PosTag pos_tag_of(const Token& t) {
  return default_pos_tagger().tag(t.text, t.kind);
}

}  // namespace comet
