#pragma once

// Longest-matching-block sequence differ producing replace/delete/insert/
// equal opcodes, with the classic recursive divide-and-conquer structure and
// earliest-match tie-breaking.

#include <algorithm>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "comet/token.hpp"

namespace comet {

enum class OpTag : uint8_t { Equal, Replace, Insert, Delete };

inline const char* op_tag_name(OpTag t) {
  switch (t) {
    case OpTag::Equal: return "equal";
    case OpTag::Replace: return "replace";
    case OpTag::Insert: return "insert";
    case OpTag::Delete: return "delete";
  }
  return "?";
}

struct Opcode {
  OpTag tag;
  size_t old_begin, old_end;  // range in the old sequence
  size_t new_begin, new_end;  // range in the new sequence

  friend bool operator==(const Opcode& a, const Opcode& b) {
    return a.tag == b.tag && a.old_begin == b.old_begin &&
           a.old_end == b.old_end && a.new_begin == b.new_begin &&
           a.new_end == b.new_end;
  }
};

struct MatchBlock {
  size_t a, b, size;
};

namespace detail {

// Longest matching block of a[alo,ahi) and b[blo,bhi); ties prefer the
// earliest start in a, then the earliest in b.
inline MatchBlock find_longest_match(
    const std::vector<std::string>& a, const std::vector<std::string>& b,
    const std::unordered_map<std::string, std::vector<size_t>>& b2j,
    size_t alo, size_t ahi, size_t blo, size_t bhi) {
  size_t besti = alo, bestj = blo, bestsize = 0;
  std::unordered_map<size_t, size_t> j2len;
  std::unordered_map<size_t, size_t> newj2len;
  for (size_t i = alo; i < ahi; ++i) {
    newj2len.clear();
    auto it = b2j.find(a[i]);
    if (it != b2j.end()) {
      for (size_t j : it->second) {
        if (j < blo) continue;
        if (j >= bhi) break;
        size_t k = 1;
        if (j > blo) {
          auto prev = j2len.find(j - 1);
          if (prev != j2len.end()) k = prev->second + 1;
        }
        newj2len[j] = k;
        if (k > bestsize) {
          besti = i + 1 - k;
          bestj = j + 1 - k;
          bestsize = k;
        }
      }
    }
    std::swap(j2len, newj2len);
  }
  return MatchBlock{besti, bestj, bestsize};
}

}  // namespace detail

inline std::vector<MatchBlock> matching_blocks(
    const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::unordered_map<std::string, std::vector<size_t>> b2j;
  for (size_t j = 0; j < b.size(); ++j) b2j[b[j]].push_back(j);

  std::vector<MatchBlock> raw;
  std::deque<std::array<size_t, 4>> queue;
  queue.push_back({0, a.size(), 0, b.size()});
  while (!queue.empty()) {
    auto [alo, ahi, blo, bhi] = queue.back();
    queue.pop_back();
    MatchBlock m = detail::find_longest_match(a, b, b2j, alo, ahi, blo, bhi);
    if (m.size > 0) {
      raw.push_back(m);
      if (alo < m.a && blo < m.b) queue.push_back({alo, m.a, blo, m.b});
      if (m.a + m.size < ahi && m.b + m.size < bhi)
        queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const MatchBlock& x, const MatchBlock& y) {
    return std::tie(x.a, x.b, x.size) < std::tie(y.a, y.b, y.size);
  });

  // Merge adjacent blocks, then append the terminating sentinel.
  std::vector<MatchBlock> blocks;
  size_t a1 = 0, b1 = 0, s1 = 0;
  for (const MatchBlock& m : raw) {
    if (a1 + s1 == m.a && b1 + s1 == m.b) {
      s1 += m.size;
    } else {
      if (s1) blocks.push_back({a1, b1, s1});
      a1 = m.a;
      b1 = m.b;
      s1 = m.size;
    }
  }
  if (s1) blocks.push_back({a1, b1, s1});
  blocks.push_back({a.size(), b.size(), 0});
  return blocks;
}

// Opcodes covering both sequences completely and in order.
inline std::vector<Opcode> match_sequences(const std::vector<std::string>& a,
                                           const std::vector<std::string>& b) {
  std::vector<Opcode> out;
  size_t i = 0, j = 0;
  for (const MatchBlock& m : matching_blocks(a, b)) {
    OpTag tag;
    bool have_gap = false;
    if (i < m.a && j < m.b) {
      tag = OpTag::Replace;
      have_gap = true;
    } else if (i < m.a) {
      tag = OpTag::Delete;
      have_gap = true;
    } else if (j < m.b) {
      tag = OpTag::Insert;
      have_gap = true;
    }
    if (have_gap) out.push_back({tag, i, m.a, j, m.b});
    i = m.a + m.size;
    j = m.b + m.size;
    if (m.size) out.push_back({OpTag::Equal, m.a, i, m.b, j});
  }
  return out;
}

inline std::vector<Opcode> match_sequences(const TokenSeq& a,
                                           const TokenSeq& b) {
  return match_sequences(a.texts(), b.texts());
}

}  // namespace comet
