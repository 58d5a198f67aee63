#pragma once

// Replaying edit actions against an old comment to produce the new one.

#include <string>
#include <vector>

#include "comet/edit_lexicon.hpp"
#include "comet/token.hpp"

namespace comet {

enum class ApplyMode : uint8_t {
  Strict,   // unmatched anchor raises AnchorNotFound
  Lenient,  // unmatched anchor skips the action with a warning
};

struct ApplyOutcome {
  TokenSeq result{TokenSource::Comment};
  std::vector<std::string> warnings;
};

// Walks the old comment left to right, matching each action's old span at or
// after the cursor (first occurrence on ties, with a warning), emitting the
// action's replacement content, and copying untouched tokens through.
inline ApplyOutcome apply_edits(const TokenSeq& c_old,
                                const EditSequence& edits,
                                ApplyMode mode = ApplyMode::Strict) {
  ApplyOutcome out;
  const auto& old_toks = c_old.tokens;
  const size_t n = old_toks.size();
  size_t p = 0;

  auto matches_at = [&](const std::vector<Token>& needle, size_t pos) {
    if (pos + needle.size() > n) return false;
    for (size_t k = 0; k < needle.size(); ++k)
      if (old_toks[pos + k].text != needle[k].text) return false;
    return true;
  };

  for (size_t ai = 0; ai < edits.actions.size(); ++ai) {
    const EditAction& act = edits.actions[ai];
    // A raw insertion has no anchor: it lands at the cursor.
    if (act.old_span.empty()) {
      if (act.kind == EditKind::Insert || act.kind == EditKind::Replace ||
          act.kind == EditKind::InsertKeepBefore ||
          act.kind == EditKind::InsertKeepAfter ||
          act.kind == EditKind::ReplaceKeepBefore ||
          act.kind == EditKind::ReplaceKeepAfter) {
        out.result.tokens.insert(out.result.tokens.end(), act.new_span.begin(),
                                 act.new_span.end());
      }
      continue;
    }

    size_t pos = n;  // first match at or after the cursor
    size_t hits = 0;
    for (size_t q = p; q + act.old_span.size() <= n; ++q) {
      if (matches_at(act.old_span, q)) {
        if (hits == 0) pos = q;
        ++hits;
      }
    }
    if (hits == 0) {
      std::string msg = "action " + std::to_string(ai) + " (" +
                        edit_kind_name(act.kind) + "): anchor '" +
                        join_texts(texts_of(act.old_span)) +
                        "' not found at or after position " + std::to_string(p);
      if (mode == ApplyMode::Strict)
        throw Error(ErrorCode::AnchorNotFound, msg);
      out.warnings.push_back("skipped: " + msg);
      continue;
    }
    if (hits > 1) {
      out.warnings.push_back(
          "ambiguous anchor for action " + std::to_string(ai) + " ('" +
          join_texts(texts_of(act.old_span)) + "' matches " +
          std::to_string(hits) + " times); using the first occurrence");
    }

    // Copy the untouched region before the match.
    out.result.tokens.insert(out.result.tokens.end(), old_toks.begin() + p,
                             old_toks.begin() + pos);
    switch (act.kind) {
      case EditKind::Keep:
        out.result.tokens.insert(out.result.tokens.end(),
                                 old_toks.begin() + pos,
                                 old_toks.begin() + pos + act.old_span.size());
        break;
      case EditKind::Delete:
        break;
      default:
        out.result.tokens.insert(out.result.tokens.end(), act.new_span.begin(),
                                 act.new_span.end());
        break;
    }
    p = pos + act.old_span.size();
  }
  out.result.tokens.insert(out.result.tokens.end(), old_toks.begin() + p,
                           old_toks.end());
  return out;
}

}  // namespace comet
