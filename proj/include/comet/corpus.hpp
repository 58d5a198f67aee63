#pragma once

// Parallel corpus of simultaneous method/comment changes: ingestion from
// line-delimited JSON records, relevance filtering with per-example reject
// reasons, project-disjoint partitioning, persistence, and summary stats.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "comet/edit_encode.hpp"
#include "comet/lexer.hpp"
#include "comet/token.hpp"

namespace comet {

// ---------------------------------------------------------------------------
// Records and examples
// ---------------------------------------------------------------------------

struct RawRecord {
  std::string id;  // optional on input; assigned during ingest when missing
  std::string project;
  std::string commit_before, commit_after;
  std::string m_old, m_new;  // raw method sources
  std::string c_old, c_new;  // raw @return comments
};

struct Example {
  std::string id;
  std::string project;
  std::string commit_before, commit_after;
  std::string m_old_raw, m_new_raw, c_old_raw, c_new_raw;
  TokenSeq m_old{TokenSource::Method};
  TokenSeq m_new{TokenSource::Method};
  TokenSeq c_old{TokenSource::Comment};
  TokenSeq c_new{TokenSource::Comment};
  EditSequence m_edit;  // code edits, Keep spans included
  EditSequence c_edit;  // condensed comment edits (empty if c_old == c_new)
};

namespace corpus_detail {

inline std::string get_string(const nlohmann::json& j,
                              std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (j.contains(k) && j[k].is_string()) return j[k].get<std::string>();
  return {};
}

}  // namespace corpus_detail

// Parses one line-delimited JSON record. Accepts the canonical field names
// (m_old, m_new, c_old, c_new) and the miner aliases (method_before, ...).
inline RawRecord parse_record_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::BadRecord, "record is not a JSON object");
  using corpus_detail::get_string;
  RawRecord r;
  r.id = get_string(j, {"id"});
  r.project = get_string(j, {"project"});
  r.commit_before = get_string(j, {"commit_before"});
  r.commit_after = get_string(j, {"commit_after"});
  r.m_old = get_string(j, {"m_old", "method_before"});
  r.m_new = get_string(j, {"m_new", "method_after"});
  r.c_old = get_string(j, {"c_old", "comment_before"});
  r.c_new = get_string(j, {"c_new", "comment_after"});
  if (r.m_old.empty() || r.m_new.empty())
    throw Error(ErrorCode::BadRecord, "record lacks method sources");
  if (r.c_old.empty() || r.c_new.empty())
    throw Error(ErrorCode::BadRecord, "record lacks comment sources");
  return r;
}

inline std::string record_to_json_line(const RawRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["project"] = r.project;
  j["commit_before"] = r.commit_before;
  j["commit_after"] = r.commit_after;
  j["m_old"] = r.m_old;
  j["m_new"] = r.m_new;
  j["c_old"] = r.c_old;
  j["c_new"] = r.c_new;
  return j.dump();
}

// Tokenizes and derives edit sequences for one record. Throws comet::Error
// (UnbalancedDelimiters, EmptyComment, ...) on malformed sources.
inline Example example_from_record(const RawRecord& r,
                                   const std::string& fallback_id) {
  Example e;
  e.id = r.id.empty() ? fallback_id : r.id;
  e.project = r.project;
  e.commit_before = r.commit_before;
  e.commit_after = r.commit_after;
  e.m_old_raw = r.m_old;
  e.m_new_raw = r.m_new;
  e.c_old_raw = r.c_old;
  e.c_new_raw = r.c_new;
  e.m_old = lex_method(r.m_old);
  e.m_new = lex_method(r.m_new);
  e.c_old = tokenize_comment(r.c_old);
  e.c_new = tokenize_comment(r.c_new);
  e.m_edit = encode_code_edits(e.m_old, e.m_new);
  if (!e.c_old.same_texts(e.c_new))
    e.c_edit = encode_comment_edits(e.c_old, e.c_new);
  else
    e.c_edit.flavor = EditFlavor::CommentCondensed;
  return e;
}

inline RawRecord record_of(const Example& e) {
  RawRecord r;
  r.id = e.id;
  r.project = e.project;
  r.commit_before = e.commit_before;
  r.commit_after = e.commit_after;
  r.m_old = e.m_old_raw;
  r.m_new = e.m_new_raw;
  r.c_old = e.c_old_raw;
  r.c_new = e.c_new_raw;
  return r;
}

struct IngestIssue {
  size_t line_no = 0;
  std::string message;
};

struct IngestResult {
  std::vector<Example> examples;
  std::vector<IngestIssue> skipped;
};

// Reads line-delimited records; per-record failures are collected, not fatal.
inline IngestResult ingest_records(std::istream& in) {
  IngestResult out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      RawRecord r = parse_record_line(line);
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "ex-%06zu", line_no);
      out.examples.push_back(example_from_record(r, idbuf));
    } catch (const Error& err) {
      out.skipped.push_back(
          {line_no, std::string(error_code_name(err.code())) + ": " +
                        err.what()});
    }
  }
  return out;
}

inline IngestResult ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus file: " + path);
  return ingest_records(in);
}

inline void save_corpus(const std::string& path,
                        const std::vector<Example>& examples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write corpus file: " + path);
  for (const Example& e : examples)
    out << record_to_json_line(record_of(e)) << '\n';
}

// Sidecar with the derived edit sequences, keyed by example id.
inline void save_derived(const std::string& path,
                         const std::vector<Example>& examples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write derived file: " + path);
  for (const Example& e : examples) {
    nlohmann::json j;
    j["id"] = e.id;
    j["m_edit"] = join_texts(serialize(e.m_edit));
    j["c_edit"] = join_texts(serialize(e.c_edit));
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

enum class RejectReason : uint8_t {
  ReturnSignatureUnchanged,  // neither return type nor any return stmt changed
  MethodNameChanged,
  StylisticOnly,   // comments equal after normalization
  TrivialPair,     // token-identical comment or method pair
  Duplicate,       // exact duplicate of an earlier 4-tuple
};

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::ReturnSignatureUnchanged:
      return "return-signature-unchanged";
    case RejectReason::MethodNameChanged: return "method-name-changed";
    case RejectReason::StylisticOnly: return "stylistic-only";
    case RejectReason::TrivialPair: return "trivial-pair";
    case RejectReason::Duplicate: return "duplicate";
  }
  return "?";
}

namespace corpus_detail {

inline std::optional<std::vector<std::string>> try_return_type(
    const TokenSeq& m) {
  try {
    return extract_return_type(m);
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Sorted list of return-statement texts, for order-independent comparison.
inline std::vector<std::string> return_stmt_signature(const TokenSeq& m) {
  std::vector<std::string> out;
  for (const auto& stmt : extract_return_statements(m))
    out.push_back(join_texts(texts_of(stmt)));
  std::sort(out.begin(), out.end());
  return out;
}

inline bool return_relevant_change(const Example& e) {
  auto type_old = try_return_type(e.m_old);
  auto type_new = try_return_type(e.m_new);
  if (type_old.has_value() != type_new.has_value()) return true;
  if (type_old && *type_old != *type_new) return true;
  return return_stmt_signature(e.m_old) != return_stmt_signature(e.m_new);
}

inline bool same_method_name(const Example& e) {
  try {
    return method_name(e.m_old) == method_name(e.m_new);
  } catch (const Error&) {
    return false;  // cannot establish the names match
  }
}

// Lowercased alphanumeric words only: the "stylistic change" normal form.
inline std::string stylistic_normal_form(const TokenSeq& comment) {
  std::string out;
  for (const Token& t : comment.tokens) {
    std::string w;
    for (char c : t.text)
      if (std::isalnum(static_cast<unsigned char>(c)))
        w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (w.empty()) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

inline std::string duplicate_key(const Example& e) {
  return e.m_old_raw + '\x1f' + e.m_new_raw + '\x1f' + e.c_old_raw + '\x1f' +
         e.c_new_raw;
}

}  // namespace corpus_detail

// First-failing reason for one example, applied in the documented order.
// The duplicate check (stage 5) is stateful and lives in filter_examples.
inline std::optional<RejectReason> reject_reason(const Example& e) {
  using namespace corpus_detail;
  if (!return_relevant_change(e))
    return RejectReason::ReturnSignatureUnchanged;
  if (!same_method_name(e)) return RejectReason::MethodNameChanged;
  if (stylistic_normal_form(e.c_old) == stylistic_normal_form(e.c_new))
    return RejectReason::StylisticOnly;
  if (e.c_old.same_texts(e.c_new) || e.m_old.same_texts(e.m_new))
    return RejectReason::TrivialPair;
  return std::nullopt;
}

struct FilterResult {
  std::vector<Example> kept;
  std::vector<std::pair<Example, RejectReason>> rejected;
};

inline FilterResult filter_examples(const std::vector<Example>& examples) {
  FilterResult out;
  std::unordered_set<std::string> seen;
  for (const Example& e : examples) {
    if (auto reason = reject_reason(e)) {
      out.rejected.emplace_back(e, *reason);
      continue;
    }
    if (!seen.insert(corpus_detail::duplicate_key(e)).second) {
      out.rejected.emplace_back(e, RejectReason::Duplicate);
      continue;
    }
    out.kept.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partitioning (project-disjoint)
// ---------------------------------------------------------------------------

struct Partition {
  std::vector<std::string> train, valid, test;
};

// Greedy project-level assignment: shuffle projects with the seed, then give
// each project to the split with the largest remaining deficit relative to
// its target share. Projects never straddle splits.
inline Partition partition_examples(const std::vector<Example>& examples,
                                    double train_w, double valid_w,
                                    double test_w, uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_project;
  for (const Example& e : examples) by_project[e.project].push_back(e.id);
  if (by_project.size() < 3)
    throw Error(ErrorCode::InsufficientProjects,
                "project-disjoint split needs at least 3 projects, got " +
                    std::to_string(by_project.size()));
  double wsum = train_w + valid_w + test_w;
  if (!(wsum > 0))
    throw Error(ErrorCode::BadConfig, "partition weights must be positive");

  std::vector<std::string> projects;
  for (const auto& [name, ids] : by_project) projects.push_back(name);
  std::mt19937_64 rng(seed);
  std::shuffle(projects.begin(), projects.end(), rng);

  double total = static_cast<double>(examples.size());
  std::array<double, 3> share = {train_w / wsum, valid_w / wsum,
                                 test_w / wsum};
  std::array<double, 3> have = {0, 0, 0};
  Partition part;
  std::array<std::vector<std::string>*, 3> lists = {&part.train, &part.valid,
                                                    &part.test};
  std::array<bool, 3> touched = {false, false, false};
  size_t remaining = projects.size();
  for (const std::string& p : projects) {
    // Every split must receive at least one project; once the spare
    // projects run out, fill the still-empty splits first.
    size_t empties = 0;
    for (bool t : touched)
      if (!t) ++empties;
    int pick = -1;
    double best_deficit = -1e300;
    for (int s = 0; s < 3; ++s) {
      if (remaining <= empties && touched[s]) continue;
      double deficit = share[s] * total - have[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        pick = s;
      }
    }
    const auto& ids = by_project[p];
    for (const std::string& id : ids) lists[pick]->push_back(id);
    have[pick] += static_cast<double>(ids.size());
    touched[pick] = true;
    --remaining;
  }
  return part;
}

inline void save_partition(const std::string& path, const Partition& p) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write partition file: " + path);
  for (const auto& id : p.train) out << "train\t" << id << '\n';
  for (const auto& id : p.valid) out << "valid\t" << id << '\n';
  for (const auto& id : p.test) out << "test\t" << id << '\n';
}

inline Partition load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open partition file: " + path);
  Partition p;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorCode::BadRecord, "partition line " +
                                            std::to_string(line_no) +
                                            " lacks a tab separator");
    std::string split = line.substr(0, tab);
    std::string id = line.substr(tab + 1);
    if (split == "train")
      p.train.push_back(id);
    else if (split == "valid")
      p.valid.push_back(id);
    else if (split == "test")
      p.test.push_back(id);
    else
      throw Error(ErrorCode::BadRecord,
                  "unknown split name '" + split + "' on line " +
                      std::to_string(line_no));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Stats
// ---------------------------------------------------------------------------

// Token-multiset overlap ratio: |intersection| / max(|a|, |b|).
inline double overlap_similarity(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : a) ++counts[t];
  size_t inter = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++inter;
    }
  }
  return static_cast<double>(inter) /
         static_cast<double>(std::max(a.size(), b.size()));
}

struct CorpusStats {
  size_t examples = 0;
  size_t projects = 0;
  double mean_method_tokens = 0, median_method_tokens = 0;
  double mean_comment_tokens = 0, median_comment_tokens = 0;
  double mean_method_similarity = 0;
  double mean_comment_similarity = 0;
  double mean_edit_actions = 0;  // per example, over the condensed edits
  size_t total_edit_actions = 0;
  // Family percentages over all condensed comment-edit actions.
  std::map<std::string, double> action_family_pct;
  std::map<std::string, size_t> action_kind_counts;
};

namespace corpus_detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline const char* action_family(EditKind k) {
  switch (k) {
    case EditKind::Insert:
    case EditKind::InsertKeepBefore:
    case EditKind::InsertKeepAfter: return "insert";
    case EditKind::Delete:
    case EditKind::DeleteKeepBefore:
    case EditKind::DeleteKeepAfter: return "delete";
    case EditKind::Replace:
    case EditKind::ReplaceKeepBefore:
    case EditKind::ReplaceKeepAfter: return "replace";
    case EditKind::Keep: return "keep";
  }
  return "?";
}

}  // namespace corpus_detail

inline CorpusStats corpus_stats(const std::vector<Example>& examples) {
  using namespace corpus_detail;
  CorpusStats s;
  s.examples = examples.size();
  if (examples.empty()) return s;
  std::set<std::string> projects;
  std::vector<double> mlens, clens;
  for (const Example& e : examples) {
    projects.insert(e.project);
    mlens.push_back(static_cast<double>(e.m_old.tokens.size()));
    clens.push_back(static_cast<double>(e.c_old.tokens.size()));
    s.mean_method_tokens += mlens.back();
    s.mean_comment_tokens += clens.back();
    s.mean_method_similarity +=
        overlap_similarity(e.m_old.texts(), e.m_new.texts());
    s.mean_comment_similarity +=
        overlap_similarity(e.c_old.texts(), e.c_new.texts());
    s.mean_edit_actions += static_cast<double>(e.c_edit.actions.size());
    s.total_edit_actions += e.c_edit.actions.size();
    for (const EditAction& a : e.c_edit.actions) {
      ++s.action_kind_counts[std::string(
          detail::kind_syntax(a.kind).open)];
      s.action_family_pct[action_family(a.kind)] += 1.0;
    }
  }
  double n = static_cast<double>(examples.size());
  s.projects = projects.size();
  s.mean_method_tokens /= n;
  s.mean_comment_tokens /= n;
  s.median_method_tokens = median_of(mlens);
  s.median_comment_tokens = median_of(clens);
  s.mean_method_similarity /= n;
  s.mean_comment_similarity /= n;
  s.mean_edit_actions /= n;
  if (s.total_edit_actions > 0)
    for (auto& [family, count] : s.action_family_pct)
      count = 100.0 * count / static_cast<double>(s.total_edit_actions);
  return s;
}

inline std::string stats_to_text(const CorpusStats& s) {
  std::ostringstream out;
  out << "examples\t" << s.examples << '\n';
  out << "projects\t" << s.projects << '\n';
  out << "mean_method_tokens\t" << s.mean_method_tokens << '\n';
  out << "median_method_tokens\t" << s.median_method_tokens << '\n';
  out << "mean_comment_tokens\t" << s.mean_comment_tokens << '\n';
  out << "median_comment_tokens\t" << s.median_comment_tokens << '\n';
  out << "mean_method_similarity\t" << s.mean_method_similarity << '\n';
  out << "mean_comment_similarity\t" << s.mean_comment_similarity << '\n';
  out << "mean_edit_actions\t" << s.mean_edit_actions << '\n';
  out << "total_edit_actions\t" << s.total_edit_actions << '\n';
  for (const auto& [family, pct] : s.action_family_pct)
    out << "action_pct_" << family << '\t' << pct << '\n';
  for (const auto& [kind, count] : s.action_kind_counts)
    out << "action_count_" << kind << '\t' << count << '\n';
  return out.str();
}

}  // namespace comet
