#pragma once

// Turning a (old, new) sequence pair into edit actions.
//
// Code edits tile the whole method with Keep/Insert/Delete/Replace straight
// from the diff opcodes. Comment edits are condensed: unchanged regions are
// dropped and every action is anchored on a span of the old comment that
// occurs exactly once, extending with kept context tokens when needed.

#include <optional>
#include <string>
#include <vector>

#include "comet/diff.hpp"
#include "comet/edit_lexicon.hpp"
#include "comet/token.hpp"

namespace comet {

inline EditSequence encode_code_edits(const TokenSeq& m_old,
                                      const TokenSeq& m_new) {
  EditSequence seq;
  seq.flavor = EditFlavor::Code;
  for (const Opcode& op : match_sequences(m_old, m_new)) {
    std::vector<Token> old_span(m_old.tokens.begin() + op.old_begin,
                                m_old.tokens.begin() + op.old_end);
    std::vector<Token> new_span(m_new.tokens.begin() + op.new_begin,
                                m_new.tokens.begin() + op.new_end);
    switch (op.tag) {
      case OpTag::Equal:
        seq.actions.emplace_back(EditKind::Keep, std::move(old_span),
                                 std::vector<Token>{});
        break;
      case OpTag::Insert:
        seq.actions.emplace_back(EditKind::Insert, std::vector<Token>{},
                                 std::move(new_span));
        break;
      case OpTag::Delete:
        seq.actions.emplace_back(EditKind::Delete, std::move(old_span),
                                 std::vector<Token>{});
        break;
      case OpTag::Replace:
        seq.actions.emplace_back(EditKind::Replace, std::move(old_span),
                                 std::move(new_span));
        break;
    }
  }
  return seq;
}

namespace detail {

inline size_t count_span_occurrences(const std::vector<std::string>& hay,
                                     const std::vector<std::string>& needle) {
  if (needle.empty()) return hay.size() + 1;
  if (needle.size() > hay.size()) return 0;
  size_t count = 0;
  for (size_t p = 0; p + needle.size() <= hay.size(); ++p) {
    bool hit = true;
    for (size_t k = 0; k < needle.size(); ++k) {
      if (hay[p + k] != needle[k]) {
        hit = false;
        break;
      }
    }
    if (hit) ++count;
  }
  return count;
}

struct AnchoredAction {
  EditAction act;
  size_t claim_lo = 0, claim_hi = 0;  // old-comment region covered by old_span
  size_t op_i1 = 0, op_i2 = 0;        // underlying change range in old
  size_t op_j1 = 0, op_j2 = 0;        // underlying change range in new
};

}  // namespace detail

// Condensed comment edit encoding. Raises NoDistinctChange when the two
// comments are token-wise identical.
inline EditSequence encode_comment_edits(const TokenSeq& c_old,
                                         const TokenSeq& c_new) {
  using detail::AnchoredAction;
  const std::vector<std::string> old_texts = c_old.texts();
  const std::vector<std::string> new_texts = c_new.texts();

  std::vector<Opcode> ops;
  for (const Opcode& op : match_sequences(old_texts, new_texts))
    if (op.tag != OpTag::Equal) ops.push_back(op);
  if (ops.empty())
    throw Error(ErrorCode::NoDistinctChange,
                "old and new comments are token-wise identical");

  EditSequence seq;
  seq.flavor = EditFlavor::CommentCondensed;

  auto unique_span = [&](size_t s, size_t e) {
    if (s >= e) return false;
    std::vector<std::string> span(old_texts.begin() + s, old_texts.begin() + e);
    return detail::count_span_occurrences(old_texts, span) == 1;
  };
  auto old_slice = [&](size_t s, size_t e) {
    return std::vector<Token>(c_old.tokens.begin() + s,
                              c_old.tokens.begin() + e);
  };
  auto new_slice = [&](size_t s, size_t e) {
    return std::vector<Token>(c_new.tokens.begin() + s,
                              c_new.tokens.begin() + e);
  };

  // Builds the anchored action for one change, or nothing if no unique anchor
  // exists within the allowed context window.
  auto anchor_change = [&](size_t i1, size_t i2, size_t j1, size_t j2,
                           size_t before_limit, size_t after_limit)
      -> std::optional<AnchoredAction> {
    const bool is_insert = (i1 == i2);
    const bool is_delete = (j1 == j2) && !is_insert;

    auto build = [&](EditKind kind, size_t lo, size_t hi) {
      AnchoredAction out;
      out.act.kind = kind;
      out.act.old_span = old_slice(lo, hi);
      // Kept context enters the new span on the side it was taken from.
      std::vector<Token> nspan = old_slice(lo, i1);
      std::vector<Token> changed = new_slice(j1, j2);
      nspan.insert(nspan.end(), changed.begin(), changed.end());
      std::vector<Token> after = old_slice(i2, hi);
      nspan.insert(nspan.end(), after.begin(), after.end());
      if (kind == EditKind::Delete) nspan.clear();
      out.act.new_span = std::move(nspan);
      out.claim_lo = lo;
      out.claim_hi = hi;
      out.op_i1 = i1;
      out.op_i2 = i2;
      out.op_j1 = j1;
      out.op_j2 = j2;
      return out;
    };

    if (!is_insert && unique_span(i1, i2)) {
      return build(is_delete ? EditKind::Delete : EditKind::Replace, i1, i2);
    }
    // Extend with kept context before the change, one token at a time.
    for (size_t s = i1; s-- > before_limit;) {
      if (unique_span(s, i2)) {
        EditKind kind = is_insert   ? EditKind::InsertKeepBefore
                        : is_delete ? EditKind::DeleteKeepBefore
                                    : EditKind::ReplaceKeepBefore;
        return build(kind, s, i2);
      }
    }
    // Before direction exhausted: restart from the change itself and extend
    // with kept context after it.
    EditKind after_kind = is_insert   ? EditKind::InsertKeepAfter
                          : is_delete ? EditKind::DeleteKeepAfter
                                      : EditKind::ReplaceKeepAfter;
    for (size_t e = i2 + 1; e <= after_limit; ++e) {
      if (unique_span(i1, e)) return build(after_kind, i1, e);
    }
    // Both pure directions exhausted: extend after starting from the fully
    // before-extended span.
    if (before_limit < i1) {
      for (size_t e = i2 + 1; e <= after_limit; ++e) {
        if (unique_span(before_limit, e)) return build(after_kind, before_limit, e);
      }
    }
    return std::nullopt;
  };

  auto whole_replace = [&]() {
    EditSequence out;
    out.flavor = EditFlavor::CommentCondensed;
    out.actions.emplace_back(EditKind::Replace,
                             old_slice(0, old_texts.size()),
                             new_slice(0, new_texts.size()));
    return out;
  };

  std::vector<AnchoredAction> anchored;
  for (size_t idx = 0; idx < ops.size(); ++idx) {
    size_t i1 = ops[idx].old_begin, i2 = ops[idx].old_end;
    size_t j1 = ops[idx].new_begin, j2 = ops[idx].new_end;
    for (;;) {
      size_t before_limit = anchored.empty() ? 0 : anchored.back().op_i2;
      size_t after_limit =
          idx + 1 < ops.size() ? ops[idx + 1].old_begin : old_texts.size();
      auto got = anchor_change(i1, i2, j1, j2, before_limit, after_limit);
      if (!got) return whole_replace();
      if (!anchored.empty() && got->claim_lo < anchored.back().claim_hi) {
        // The anchor would reuse context already claimed by the previous
        // action: merge the two changes into one replacement and retry.
        i1 = anchored.back().op_i1;
        j1 = anchored.back().op_j1;
        anchored.pop_back();
        continue;
      }
      anchored.push_back(std::move(*got));
      break;
    }
  }

  for (AnchoredAction& a : anchored) seq.actions.push_back(std::move(a.act));
  return seq;
}

// Convenience: both derived edit views of an example pair.
inline EditSequence derive_code_edits(const TokenSeq& m_old,
                                      const TokenSeq& m_new) {
  return encode_code_edits(m_old, m_new);
}
inline EditSequence derive_comment_edits(const TokenSeq& c_old,
                                         const TokenSeq& c_new) {
  return encode_comment_edits(c_old, c_new);
}

}  // namespace comet
