#pragma once

// The edit-action vocabulary: reserved keywords, action structure, and the
// keyword-delimited serialization both directions.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "comet/token.hpp"

namespace comet {

enum class EditKind : uint8_t {
  Insert,
  Delete,
  Replace,
  Keep,
  ReplaceKeepBefore,
  ReplaceKeepAfter,
  InsertKeepBefore,
  InsertKeepAfter,
  DeleteKeepBefore,
  DeleteKeepAfter,
};

inline const char* edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::Insert: return "Insert";
    case EditKind::Delete: return "Delete";
    case EditKind::Replace: return "Replace";
    case EditKind::Keep: return "Keep";
    case EditKind::ReplaceKeepBefore: return "ReplaceKeepBefore";
    case EditKind::ReplaceKeepAfter: return "ReplaceKeepAfter";
    case EditKind::InsertKeepBefore: return "InsertKeepBefore";
    case EditKind::InsertKeepAfter: return "InsertKeepAfter";
    case EditKind::DeleteKeepBefore: return "DeleteKeepBefore";
    case EditKind::DeleteKeepAfter: return "DeleteKeepAfter";
  }
  return "?";
}

// Reserved keywords. These literals are part of the on-disk/model vocabulary
// and must never change.
namespace kw {
inline constexpr std::string_view Insert = "<Insert>";
inline constexpr std::string_view InsertEnd = "<InsertEnd>";
inline constexpr std::string_view Delete = "<Delete>";
inline constexpr std::string_view DeleteEnd = "<DeleteEnd>";
inline constexpr std::string_view ReplaceOld = "<ReplaceOld>";
inline constexpr std::string_view ReplaceNew = "<ReplaceNew>";
inline constexpr std::string_view ReplaceEnd = "<ReplaceEnd>";
inline constexpr std::string_view Keep = "<Keep>";
inline constexpr std::string_view KeepEnd = "<KeepEnd>";
inline constexpr std::string_view ReplaceOldKeepBefore = "<ReplaceOldKeepBefore>";
inline constexpr std::string_view ReplaceNewKeepBefore = "<ReplaceNewKeepBefore>";
inline constexpr std::string_view ReplaceOldKeepAfter = "<ReplaceOldKeepAfter>";
inline constexpr std::string_view ReplaceNewKeepAfter = "<ReplaceNewKeepAfter>";
inline constexpr std::string_view InsertOldKeepBefore = "<InsertOldKeepBefore>";
inline constexpr std::string_view InsertNewKeepBefore = "<InsertNewKeepBefore>";
inline constexpr std::string_view InsertOldKeepAfter = "<InsertOldKeepAfter>";
inline constexpr std::string_view InsertNewKeepAfter = "<InsertNewKeepAfter>";
inline constexpr std::string_view DeleteOldKeepBefore = "<DeleteOldKeepBefore>";
inline constexpr std::string_view DeleteNewKeepBefore = "<DeleteNewKeepBefore>";
inline constexpr std::string_view DeleteOldKeepAfter = "<DeleteOldKeepAfter>";
inline constexpr std::string_view DeleteNewKeepAfter = "<DeleteNewKeepAfter>";
}  // namespace kw

inline const std::vector<std::string>& edit_keywords() {
  static const std::vector<std::string> all = {
      std::string(kw::Insert),
      std::string(kw::InsertEnd),
      std::string(kw::Delete),
      std::string(kw::DeleteEnd),
      std::string(kw::ReplaceOld),
      std::string(kw::ReplaceNew),
      std::string(kw::ReplaceEnd),
      std::string(kw::Keep),
      std::string(kw::KeepEnd),
      std::string(kw::ReplaceOldKeepBefore),
      std::string(kw::ReplaceNewKeepBefore),
      std::string(kw::ReplaceOldKeepAfter),
      std::string(kw::ReplaceNewKeepAfter),
      std::string(kw::InsertOldKeepBefore),
      std::string(kw::InsertNewKeepBefore),
      std::string(kw::InsertOldKeepAfter),
      std::string(kw::InsertNewKeepAfter),
      std::string(kw::DeleteOldKeepBefore),
      std::string(kw::DeleteNewKeepBefore),
      std::string(kw::DeleteOldKeepAfter),
      std::string(kw::DeleteNewKeepAfter),
  };
  return all;
}

inline bool is_edit_keyword(std::string_view s) {
  static const std::unordered_map<std::string_view, int> set = [] {
    std::unordered_map<std::string_view, int> m;
    int i = 0;
    for (const std::string& k : edit_keywords()) m[k] = i++;
    return m;
  }();
  return set.count(s) > 0;
}

// One edit action. `old_span` addresses tokens of the old sequence (the
// anchor for condensed comment edits), `new_span` is the replacement content
// (anchored kinds repeat the kept context inside it).
struct EditAction {
  EditKind kind = EditKind::Keep;
  std::vector<Token> old_span;
  std::vector<Token> new_span;

  EditAction() = default;
  EditAction(EditKind k, std::vector<Token> o, std::vector<Token> n)
      : kind(k), old_span(std::move(o)), new_span(std::move(n)) {}

  friend bool operator==(const EditAction& a, const EditAction& b) {
    return a.kind == b.kind && texts_of(a.old_span) == texts_of(b.old_span) &&
           texts_of(a.new_span) == texts_of(b.new_span);
  }
};

// Code edit sequences tile the whole method (Keep/Insert/Delete/Replace);
// condensed comment sequences contain only changed regions with kept context
// folded into anchored actions.
enum class EditFlavor : uint8_t { Code, CommentCondensed };

struct EditSequence {
  std::vector<EditAction> actions;
  EditFlavor flavor = EditFlavor::CommentCondensed;

  friend bool operator==(const EditSequence& a, const EditSequence& b) {
    return a.flavor == b.flavor && a.actions == b.actions;
  }
};

namespace detail {

struct KindSyntax {
  std::string_view open;            // opening keyword
  std::optional<std::string_view> mid;  // separator between old and new spans
  std::string_view end;             // terminator
  bool emits_old;                   // serialized form has an old-span section
  bool emits_new;                   // serialized form has a new-span section
};

inline KindSyntax kind_syntax(EditKind k) {
  switch (k) {
    case EditKind::Insert:
      return {kw::Insert, std::nullopt, kw::InsertEnd, false, true};
    case EditKind::Delete:
      return {kw::Delete, std::nullopt, kw::DeleteEnd, true, false};
    case EditKind::Keep:
      return {kw::Keep, std::nullopt, kw::KeepEnd, true, false};
    case EditKind::Replace:
      return {kw::ReplaceOld, kw::ReplaceNew, kw::ReplaceEnd, true, true};
    case EditKind::ReplaceKeepBefore:
      return {kw::ReplaceOldKeepBefore, kw::ReplaceNewKeepBefore,
              kw::ReplaceEnd, true, true};
    case EditKind::ReplaceKeepAfter:
      return {kw::ReplaceOldKeepAfter, kw::ReplaceNewKeepAfter, kw::ReplaceEnd,
              true, true};
    case EditKind::InsertKeepBefore:
      return {kw::InsertOldKeepBefore, kw::InsertNewKeepBefore, kw::InsertEnd,
              true, true};
    case EditKind::InsertKeepAfter:
      return {kw::InsertOldKeepAfter, kw::InsertNewKeepAfter, kw::InsertEnd,
              true, true};
    case EditKind::DeleteKeepBefore:
      return {kw::DeleteOldKeepBefore, kw::DeleteNewKeepBefore, kw::DeleteEnd,
              true, true};
    case EditKind::DeleteKeepAfter:
      return {kw::DeleteOldKeepAfter, kw::DeleteNewKeepAfter, kw::DeleteEnd,
              true, true};
  }
  return {kw::Keep, std::nullopt, kw::KeepEnd, true, false};
}

inline std::optional<EditKind> kind_for_open_keyword(std::string_view open) {
  static const std::unordered_map<std::string_view, EditKind> m = {
      {kw::Insert, EditKind::Insert},
      {kw::Delete, EditKind::Delete},
      {kw::Keep, EditKind::Keep},
      {kw::ReplaceOld, EditKind::Replace},
      {kw::ReplaceOldKeepBefore, EditKind::ReplaceKeepBefore},
      {kw::ReplaceOldKeepAfter, EditKind::ReplaceKeepAfter},
      {kw::InsertOldKeepBefore, EditKind::InsertKeepBefore},
      {kw::InsertOldKeepAfter, EditKind::InsertKeepAfter},
      {kw::DeleteOldKeepBefore, EditKind::DeleteKeepBefore},
      {kw::DeleteOldKeepAfter, EditKind::DeleteKeepAfter},
  };
  auto it = m.find(open);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace detail

// Flat token-text stream: keywords interleaved with span tokens.
inline std::vector<std::string> serialize(const EditSequence& seq) {
  std::vector<std::string> out;
  for (const EditAction& a : seq.actions) {
    detail::KindSyntax syn = detail::kind_syntax(a.kind);
    out.emplace_back(syn.open);
    if (syn.emits_old)
      for (const Token& t : a.old_span) out.push_back(t.text);
    if (syn.mid) out.emplace_back(*syn.mid);
    if (syn.emits_new)
      for (const Token& t : a.new_span) out.push_back(t.text);
    out.emplace_back(syn.end);
  }
  return out;
}

struct DeserializeReport {
  bool well_formed = true;  // whole stream parsed as complete actions
  size_t consumed = 0;      // tokens consumed by the parsed prefix
  std::string issue;        // first problem, when not well formed
};

// Total parser: consumes the longest prefix of complete, well-formed actions
// and reports what stopped it. Span tokens become plain tokens of the given
// kind with no parent metadata.
inline std::pair<EditSequence, DeserializeReport> deserialize(
    const std::vector<std::string>& tokens,
    EditFlavor flavor = EditFlavor::CommentCondensed,
    TokenKind span_kind = TokenKind::Word) {
  EditSequence seq;
  seq.flavor = flavor;
  DeserializeReport rep;
  size_t i = 0;
  const size_t n = tokens.size();
  while (i < n) {
    auto kind = detail::kind_for_open_keyword(tokens[i]);
    if (!kind) {
      rep.well_formed = false;
      rep.issue = "expected an opening keyword, found '" + tokens[i] + "'";
      break;
    }
    detail::KindSyntax syn = detail::kind_syntax(*kind);
    size_t j = i + 1;
    EditAction act;
    act.kind = *kind;
    bool ok = true;
    auto read_span = [&](std::string_view stop1,
                         std::optional<std::string_view> stop2,
                         std::vector<Token>& into) -> std::string_view {
      while (j < n) {
        if (tokens[j] == stop1 || (stop2 && tokens[j] == *stop2))
          return tokens[j];
        if (is_edit_keyword(tokens[j])) return "";  // wrong keyword here
        into.emplace_back(tokens[j], span_kind);
        ++j;
      }
      return "";
    };
    if (syn.mid) {
      std::string_view hit = read_span(*syn.mid, std::nullopt, act.old_span);
      if (hit != *syn.mid) {
        rep.well_formed = false;
        rep.issue = "action starting at token " + std::to_string(i) +
                    " is missing '" + std::string(*syn.mid) + "'";
        break;
      }
      ++j;  // past mid
      hit = read_span(syn.end, std::nullopt, act.new_span);
      if (hit != syn.end) {
        rep.well_formed = false;
        rep.issue = "action starting at token " + std::to_string(i) +
                    " is missing '" + std::string(syn.end) + "'";
        break;
      }
      ++j;  // past end
    } else {
      std::vector<Token>& into = syn.emits_old ? act.old_span : act.new_span;
      std::string_view hit = read_span(syn.end, std::nullopt, into);
      if (hit != syn.end) {
        rep.well_formed = false;
        rep.issue = "action starting at token " + std::to_string(i) +
                    " is missing '" + std::string(syn.end) + "'";
        break;
      }
      ++j;
    }
    if (!ok) break;
    seq.actions.push_back(std::move(act));
    i = j;
    rep.consumed = i;
  }
  if (rep.well_formed) rep.consumed = i;
  return {std::move(seq), rep};
}

}  // namespace comet
