#pragma once

// Per-token linguistic/lexical feature extraction for the encoder inputs.
//
// One-hot layout (width 43), frozen — the model's input dimensions and the
// TSV output depend on it:
//   [0]      is_edit_keyword
//   [1]      is_java_keyword
//   [2]      is_operator
//   [3]      is_subtoken
//   [4]      matches_comment_token
//   [5]      matches_inserted_code
//   [6]      matches_deleted_code
//   [7]      matches_replaced_code
//   [8]      appears_multiple
//   [9]      is_stop_word
//   [10..15] span_membership: Insert, Delete, ReplaceOld, ReplaceNew, Keep, None
//   [16..25] pos_tag: NOUN VERB ADJ ADV DET PREP PRON NUM PUNCT OTHER
//   [26..34] subtoken_index: 0..7 (capped), none
//   [35..38] return_stmt_match: UniqueOld, UniqueNew, Both, None
//   [39..42] return_type_match: UniqueOld, UniqueNew, Both, None

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "comet/edit_lexicon.hpp"
#include "comet/lexer.hpp"
#include "comet/pos_tagger.hpp"
#include "comet/stopwords.hpp"
#include "comet/subtoken.hpp"
#include "comet/token.hpp"

namespace comet {

enum class SpanMembership : uint8_t {
  Insert,
  Delete,
  ReplaceOld,
  ReplaceNew,
  Keep,
  None,
};

enum class VersionMatch : uint8_t { UniqueOld, UniqueNew, Both, None };

inline constexpr int kSubtokenIndexCap = 7;

struct TokenFeatures {
  bool is_edit_keyword = false;
  bool is_java_keyword = false;
  bool is_operator = false;
  bool is_subtoken = false;
  bool matches_comment_token = false;
  bool matches_inserted_code = false;
  bool matches_deleted_code = false;
  bool matches_replaced_code = false;
  bool appears_multiple = false;
  bool is_stop_word = false;
  SpanMembership span_membership = SpanMembership::None;
  PosTag pos_tag = PosTag::Other;
  int subtoken_index = -1;  // -1 means "not a subtoken"; else capped at 7
  VersionMatch return_stmt_match = VersionMatch::None;
  VersionMatch return_type_match = VersionMatch::None;
};

struct FeatureMatrix {
  static constexpr int kWidth = 43;
  std::vector<std::string> texts;  // row labels, same order as rows
  std::vector<TokenFeatures> rows;

  void one_hot_row(size_t i, float* out) const {
    for (int k = 0; k < kWidth; ++k) out[k] = 0.0f;
    const TokenFeatures& f = rows[i];
    out[0] = f.is_edit_keyword;
    out[1] = f.is_java_keyword;
    out[2] = f.is_operator;
    out[3] = f.is_subtoken;
    out[4] = f.matches_comment_token;
    out[5] = f.matches_inserted_code;
    out[6] = f.matches_deleted_code;
    out[7] = f.matches_replaced_code;
    out[8] = f.appears_multiple;
    out[9] = f.is_stop_word;
    out[10 + static_cast<int>(f.span_membership)] = 1.0f;
    out[16 + static_cast<int>(f.pos_tag)] = 1.0f;
    out[26 + (f.subtoken_index < 0 ? 8 : f.subtoken_index)] = 1.0f;
    out[35 + static_cast<int>(f.return_stmt_match)] = 1.0f;
    out[39 + static_cast<int>(f.return_type_match)] = 1.0f;
  }

  std::vector<float> one_hot(size_t i) const {
    std::vector<float> out(kWidth);
    one_hot_row(i, out.data());
    return out;
  }

  std::string tsv() const;
};

namespace detail {

struct EditTokenSets {
  std::unordered_set<std::string> inserted, deleted, replaced;
};

inline EditTokenSets edit_token_sets(const EditSequence& edits) {
  EditTokenSets s;
  for (const EditAction& a : edits.actions) {
    switch (a.kind) {
      case EditKind::Insert:
      case EditKind::InsertKeepBefore:
      case EditKind::InsertKeepAfter:
        for (const Token& t : a.new_span) s.inserted.insert(lowercased(t.text));
        break;
      case EditKind::Delete:
      case EditKind::DeleteKeepBefore:
      case EditKind::DeleteKeepAfter:
        for (const Token& t : a.old_span) s.deleted.insert(lowercased(t.text));
        break;
      case EditKind::Replace:
      case EditKind::ReplaceKeepBefore:
      case EditKind::ReplaceKeepAfter:
        for (const Token& t : a.old_span) s.replaced.insert(lowercased(t.text));
        for (const Token& t : a.new_span) s.replaced.insert(lowercased(t.text));
        break;
      case EditKind::Keep:
        break;
    }
  }
  return s;
}

// Old/new sequence reconstruction from the action spans (exact for the code
// flavor, where actions tile both versions).
inline TokenSeq old_side_of(const EditSequence& edits) {
  TokenSeq out(TokenSource::Method);
  for (const EditAction& a : edits.actions)
    if (a.kind != EditKind::Insert)
      out.tokens.insert(out.tokens.end(), a.old_span.begin(), a.old_span.end());
  return out;
}

inline TokenSeq new_side_of(const EditSequence& edits) {
  TokenSeq out(TokenSource::Method);
  for (const EditAction& a : edits.actions) {
    if (a.kind == EditKind::Keep)
      out.tokens.insert(out.tokens.end(), a.old_span.begin(), a.old_span.end());
    else if (a.kind != EditKind::Delete)
      out.tokens.insert(out.tokens.end(), a.new_span.begin(), a.new_span.end());
  }
  return out;
}

struct ReturnInfo {
  std::unordered_set<std::string> stmt_old, stmt_new;
  std::unordered_set<std::string> type_old, type_new;
};

inline ReturnInfo return_info(const TokenSeq& m_old, const TokenSeq& m_new) {
  ReturnInfo info;
  for (const auto& stmt : extract_return_statements(m_old))
    for (const Token& t : stmt) info.stmt_old.insert(lowercased(t.text));
  for (const auto& stmt : extract_return_statements(m_new))
    for (const Token& t : stmt) info.stmt_new.insert(lowercased(t.text));
  try {
    for (const std::string& t : extract_return_type(m_old))
      info.type_old.insert(lowercased(t));
  } catch (const Error&) {
  }
  try {
    for (const std::string& t : extract_return_type(m_new))
      info.type_new.insert(lowercased(t));
  } catch (const Error&) {
  }
  return info;
}

inline VersionMatch version_match(const std::string& text,
                                  const std::unordered_set<std::string>& olds,
                                  const std::unordered_set<std::string>& news) {
  bool in_old = olds.count(text) > 0;
  bool in_new = news.count(text) > 0;
  if (in_old && in_new) return VersionMatch::Both;
  if (in_old) return VersionMatch::UniqueOld;
  if (in_new) return VersionMatch::UniqueNew;
  return VersionMatch::None;
}

inline SpanMembership old_side_membership(EditKind k) {
  switch (k) {
    case EditKind::Keep: return SpanMembership::Keep;
    case EditKind::Delete:
    case EditKind::DeleteKeepBefore:
    case EditKind::DeleteKeepAfter: return SpanMembership::Delete;
    case EditKind::Replace:
    case EditKind::ReplaceKeepBefore:
    case EditKind::ReplaceKeepAfter: return SpanMembership::ReplaceOld;
    case EditKind::Insert:
    case EditKind::InsertKeepBefore:
    case EditKind::InsertKeepAfter: return SpanMembership::Keep;
  }
  return SpanMembership::None;
}

inline SpanMembership new_side_membership(EditKind k) {
  switch (k) {
    case EditKind::Insert:
    case EditKind::InsertKeepBefore:
    case EditKind::InsertKeepAfter: return SpanMembership::Insert;
    case EditKind::Replace:
    case EditKind::ReplaceKeepBefore:
    case EditKind::ReplaceKeepAfter: return SpanMembership::ReplaceNew;
    case EditKind::Delete:
    case EditKind::DeleteKeepBefore:
    case EditKind::DeleteKeepAfter: return SpanMembership::Keep;
    case EditKind::Keep: return SpanMembership::Keep;
  }
  return SpanMembership::None;
}

}  // namespace detail

// Features for the serialized code-edit stream: one row per serialized token
// (keywords included), aligned with serialize(m_edit).
inline FeatureMatrix featurize_code(const EditSequence& m_edit,
                                    const TokenSeq& c_old,
                                    const PosTaggerInterface* tagger = nullptr) {
  const PosTaggerInterface& pos =
      tagger ? *tagger : default_pos_tagger();
  detail::EditTokenSets sets = detail::edit_token_sets(m_edit);
  TokenSeq m_old = detail::old_side_of(m_edit);
  TokenSeq m_new = detail::new_side_of(m_edit);
  detail::ReturnInfo ret = detail::return_info(m_old, m_new);
  std::unordered_set<std::string> comment_texts;
  for (const Token& t : c_old.tokens) comment_texts.insert(lowercased(t.text));

  FeatureMatrix fm;
  std::vector<std::string> stream = serialize(m_edit);
  std::unordered_map<std::string, int> counts;
  for (const std::string& s : stream) ++counts[s];

  struct Row {
    const Token* tok;      // null for keyword rows
    std::string text;
    SpanMembership membership;
  };
  std::vector<Row> layout;
  for (const EditAction& a : m_edit.actions) {
    detail::KindSyntax syn = detail::kind_syntax(a.kind);
    layout.push_back({nullptr, std::string(syn.open), SpanMembership::None});
    if (syn.emits_old)
      for (const Token& t : a.old_span)
        layout.push_back({&t, t.text, detail::old_side_membership(a.kind)});
    if (syn.mid)
      layout.push_back({nullptr, std::string(*syn.mid), SpanMembership::None});
    if (syn.emits_new)
      for (const Token& t : a.new_span)
        layout.push_back({&t, t.text, detail::new_side_membership(a.kind)});
    layout.push_back({nullptr, std::string(syn.end), SpanMembership::None});
  }

  for (const Row& row : layout) {
    TokenFeatures f;
    fm.texts.push_back(row.text);
    if (!row.tok) {
      f.is_edit_keyword = true;
      f.span_membership = SpanMembership::None;
      f.pos_tag = PosTag::Other;
      f.appears_multiple = counts[row.text] > 1;
      fm.rows.push_back(f);
      continue;
    }
    const Token& t = *row.tok;
    std::string low = lowercased(t.text);
    f.is_java_keyword = t.kind == TokenKind::Keyword || is_java_keyword(low);
    f.is_operator = t.kind == TokenKind::Operator;
    f.is_subtoken = t.is_subtoken();
    f.subtoken_index =
        t.is_subtoken() ? std::min(*t.parent_index, kSubtokenIndexCap) : -1;
    f.matches_comment_token = comment_texts.count(low) > 0;
    f.matches_inserted_code = sets.inserted.count(low) > 0;
    f.matches_deleted_code = sets.deleted.count(low) > 0;
    f.matches_replaced_code = sets.replaced.count(low) > 0;
    f.appears_multiple = counts[t.text] > 1;
    f.is_stop_word = is_stop_word(low);
    f.span_membership = row.membership;
    f.pos_tag = pos.tag(low, t.kind);
    f.return_stmt_match = detail::version_match(low, ret.stmt_old, ret.stmt_new);
    f.return_type_match = detail::version_match(low, ret.type_old, ret.type_new);
    fm.rows.push_back(f);
  }
  return fm;
}

// Features for comment tokens (one row per token). The code-edit context
// supplies the matches_* and return-version signals.
inline FeatureMatrix featurize_comment(
    const TokenSeq& comment, const EditSequence& m_edit,
    const PosTaggerInterface* tagger = nullptr) {
  const PosTaggerInterface& pos = tagger ? *tagger : default_pos_tagger();
  detail::EditTokenSets sets = detail::edit_token_sets(m_edit);
  TokenSeq m_old = detail::old_side_of(m_edit);
  TokenSeq m_new = detail::new_side_of(m_edit);
  detail::ReturnInfo ret = detail::return_info(m_old, m_new);

  std::unordered_map<std::string, int> counts;
  for (const Token& t : comment.tokens) ++counts[t.text];

  FeatureMatrix fm;
  for (const Token& t : comment.tokens) {
    std::string low = lowercased(t.text);
    TokenFeatures f;
    f.is_edit_keyword = is_edit_keyword(t.text);
    f.is_java_keyword = is_java_keyword(low);
    f.is_operator = t.kind == TokenKind::Operator;
    f.is_subtoken = t.is_subtoken();
    f.subtoken_index =
        t.is_subtoken() ? std::min(*t.parent_index, kSubtokenIndexCap) : -1;
    f.matches_comment_token = true;  // trivially in its own comment
    f.matches_inserted_code = sets.inserted.count(low) > 0;
    f.matches_deleted_code = sets.deleted.count(low) > 0;
    f.matches_replaced_code = sets.replaced.count(low) > 0;
    f.appears_multiple = counts[t.text] > 1;
    f.is_stop_word = is_stop_word(low);
    f.span_membership = SpanMembership::None;
    f.pos_tag = pos.tag(low, t.kind);
    f.return_stmt_match = detail::version_match(low, ret.stmt_old, ret.stmt_new);
    f.return_type_match = detail::version_match(low, ret.type_old, ret.type_new);
    fm.texts.push_back(t.text);
    fm.rows.push_back(f);
  }
  return fm;
}

// Decoder-side features, derivable from the bare token text plus the fixed
// example context (no position information).
inline TokenFeatures featurize_target_text(
    const std::string& text, const EditSequence& m_edit,
    const TokenSeq& c_old, const PosTaggerInterface* tagger = nullptr) {
  const PosTaggerInterface& pos = tagger ? *tagger : default_pos_tagger();
  detail::EditTokenSets sets = detail::edit_token_sets(m_edit);
  TokenSeq m_old = detail::old_side_of(m_edit);
  TokenSeq m_new = detail::new_side_of(m_edit);
  detail::ReturnInfo ret = detail::return_info(m_old, m_new);
  std::string low = lowercased(text);
  TokenFeatures f;
  f.is_edit_keyword = is_edit_keyword(text);
  f.is_java_keyword = is_java_keyword(low);
  f.is_stop_word = is_stop_word(low);
  f.pos_tag = pos.tag(low, TokenKind::Word);
  for (const Token& t : c_old.tokens)
    if (lowercased(t.text) == low) f.matches_comment_token = true;
  f.matches_inserted_code = sets.inserted.count(low) > 0;
  f.matches_deleted_code = sets.deleted.count(low) > 0;
  f.matches_replaced_code = sets.replaced.count(low) > 0;
  f.return_stmt_match = detail::version_match(low, ret.stmt_old, ret.stmt_new);
  f.return_type_match = detail::version_match(low, ret.type_old, ret.type_new);
  return f;
}

inline std::string FeatureMatrix::tsv() const {
  static const char* header =
      "token\tis_edit_keyword\tis_java_keyword\tis_operator\tis_subtoken\t"
      "matches_comment_token\tmatches_inserted_code\tmatches_deleted_code\t"
      "matches_replaced_code\tappears_multiple\tis_stop_word\t"
      "span_membership\tpos_tag\tsubtoken_index\treturn_stmt_match\t"
      "return_type_match";
  auto membership_name = [](SpanMembership m) {
    switch (m) {
      case SpanMembership::Insert: return "insert";
      case SpanMembership::Delete: return "delete";
      case SpanMembership::ReplaceOld: return "replace_old";
      case SpanMembership::ReplaceNew: return "replace_new";
      case SpanMembership::Keep: return "keep";
      case SpanMembership::None: return "none";
    }
    return "?";
  };
  auto version_name = [](VersionMatch v) {
    switch (v) {
      case VersionMatch::UniqueOld: return "unique_old";
      case VersionMatch::UniqueNew: return "unique_new";
      case VersionMatch::Both: return "both";
      case VersionMatch::None: return "none";
    }
    return "?";
  };
  std::string out = header;
  out += '\n';
  for (size_t i = 0; i < rows.size(); ++i) {
    const TokenFeatures& f = rows[i];
    out += texts[i];
    auto add_bool = [&](bool b) { out += b ? "\t1" : "\t0"; };
    add_bool(f.is_edit_keyword);
    add_bool(f.is_java_keyword);
    add_bool(f.is_operator);
    add_bool(f.is_subtoken);
    add_bool(f.matches_comment_token);
    add_bool(f.matches_inserted_code);
    add_bool(f.matches_deleted_code);
    add_bool(f.matches_replaced_code);
    add_bool(f.appears_multiple);
    add_bool(f.is_stop_word);
    out += '\t';
    out += membership_name(f.span_membership);
    out += '\t';
    out += pos_tag_name(f.pos_tag);
    out += '\t';
    out += f.subtoken_index < 0 ? "none" : std::to_string(f.subtoken_index);
    out += '\t';
    out += version_name(f.return_stmt_match);
    out += '\t';
    out += version_name(f.return_type_match);
    out += '\n';
  }
  return out;
}

}  // namespace comet
