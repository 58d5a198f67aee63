#pragma once

// Token vocabularies for the sequence models. Built from training-data
// token streams with a minimum-occurrence threshold; the edit keywords are
// always included so edit sequences can be generated even when a keyword is
// rare in the data. Ids 0..3 are reserved for padding, sequence start,
// sequence end, and unknown.

#include <string>
#include <unordered_map>
#include <vector>

#include "comet/edit_lexicon.hpp"
#include "comet/token.hpp"

namespace comet {

struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  std::vector<std::string> id_to_text{"<pad>", "<s>", "</s>", "<unk>"};
  std::unordered_map<std::string, int> text_to_id{
      {"<pad>", kPad}, {"<s>", kSos}, {"</s>", kEos}, {"<unk>", kUnk}};

  int add(const std::string& text) {
    auto it = text_to_id.find(text);
    if (it != text_to_id.end()) return it->second;
    int id = static_cast<int>(id_to_text.size());
    id_to_text.push_back(text);
    text_to_id.emplace(text, id);
    return id;
  }

  int id_of(const std::string& text) const {
    auto it = text_to_id.find(text);
    return it == text_to_id.end() ? kUnk : it->second;
  }

  bool contains(const std::string& text) const {
    return text_to_id.count(text) > 0;
  }

  const std::string& text_of(int id) const {
    if (id < 0 || id >= static_cast<int>(id_to_text.size()))
      throw Error(ErrorCode::VocabularyMissing,
                  "token id " + std::to_string(id) + " out of range");
    return id_to_text[static_cast<size_t>(id)];
  }

  size_t size() const { return id_to_text.size(); }
};

// Builds a vocabulary from documents (lists of token texts). Tokens kept
// when they occur at least `min_count` times overall; insertion order is
// first-seen order, so the result is deterministic given document order.
inline Vocabulary build_vocabulary(
    const std::vector<std::vector<std::string>>& documents,
    size_t min_count = 2, bool with_edit_keywords = false) {
  Vocabulary v;
  if (with_edit_keywords)
    for (const std::string& kw : edit_keywords()) v.add(kw);
  std::unordered_map<std::string, size_t> counts;
  for (const std::vector<std::string>& doc : documents)
    for (const std::string& t : doc) ++counts[t];
  for (const std::vector<std::string>& doc : documents)
    for (const std::string& t : doc)
      if (counts[t] >= min_count) v.add(t);
  return v;
}

}  // namespace comet
