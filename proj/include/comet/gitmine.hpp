#pragma once

// Version-control mining driver: walks a git repository's first-parent
// history, extracts Java methods that carry a Javadoc @return block, and
// pairs them by method name across consecutive commits. Emits RawRecords;
// all relevance decisions are left to the corpus filters. The driver shells
// out to the `git` tool, so everything except mine_repository itself is
// pure and testable offline.

#include <cctype>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "comet/corpus.hpp"
#include "comet/token.hpp"

namespace comet {

// One documented method occurrence inside a single source file version.
struct MinedMethod {
  std::string name;     // identifier preceding the parameter list
  std::string comment;  // raw /** ... */ block, delimiters included
  std::string body;     // declaration through the matching closing brace
};

namespace gitmine_detail {

struct CommandResult {
  int status = -1;
  std::string output;
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n = 0;
  while ((n = ::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  r.status = ::pclose(pipe);
  return r;
}

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += '\'';
  return out;
}

inline std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(std::move(line));
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Advances past a string/char literal or comment starting at `i`, if any.
// Returns true when it consumed something; `i` then points past it.
inline bool skip_opaque(const std::string& s, size_t& i) {
  char c = s[i];
  if (c == '"' || c == '\'') {
    size_t j = i + 1;
    while (j < s.size() && s[j] != c) {
      if (s[j] == '\\') ++j;
      ++j;
    }
    i = (j < s.size()) ? j + 1 : s.size();
    return true;
  }
  if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
    size_t j = s.find('\n', i);
    i = (j == std::string::npos) ? s.size() : j + 1;
    return true;
  }
  if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
    size_t j = s.find("*/", i + 2);
    i = (j == std::string::npos) ? s.size() : j + 2;
    return true;
  }
  return false;
}

}  // namespace gitmine_detail

// Scans Java source text for /** ... */ blocks containing @return followed
// by a method declaration, and captures the brace-balanced method body.
// Declarations that turn out not to be methods (no parameter list, no body)
// are skipped silently.
inline std::vector<MinedMethod> extract_documented_methods(
    const std::string& src) {
  using gitmine_detail::ident_char;
  using gitmine_detail::skip_opaque;
  std::vector<MinedMethod> out;
  size_t pos = 0;
  while (true) {
    size_t open = src.find("/**", pos);
    if (open == std::string::npos) break;
    size_t close = src.find("*/", open + 3);
    if (close == std::string::npos) break;
    std::string comment = src.substr(open, close + 2 - open);
    pos = close + 2;
    if (comment.find("@return") == std::string::npos) continue;

    // Skip whitespace and annotations down to the declaration itself.
    size_t decl = pos;
    while (decl < src.size()) {
      char c = src[decl];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++decl;
        continue;
      }
      if (c == '@') {
        ++decl;
        while (decl < src.size() &&
               (ident_char(src[decl]) || src[decl] == '.'))
          ++decl;
        while (decl < src.size() &&
               std::isspace(static_cast<unsigned char>(src[decl])))
          ++decl;
        if (decl < src.size() && src[decl] == '(') {
          int depth = 1;
          ++decl;
          while (decl < src.size() && depth > 0) {
            if (skip_opaque(src, decl)) continue;
            if (src[decl] == '(') ++depth;
            if (src[decl] == ')') --depth;
            ++decl;
          }
        }
        continue;
      }
      break;
    }

    // Header runs to the first '{' or ';' outside parentheses. Hitting
    // another comment first means the @return block was dangling.
    size_t i = decl;
    int paren = 0;
    size_t body_open = std::string::npos;
    while (i < src.size()) {
      char c = src[i];
      if (c == '/' && i + 1 < src.size() &&
          (src[i + 1] == '/' || src[i + 1] == '*'))
        break;
      if (skip_opaque(src, i)) continue;
      if (c == '(') ++paren;
      if (c == ')') --paren;
      if (paren == 0 && c == ';') break;  // abstract/interface: no body
      if (paren == 0 && c == '{') {
        body_open = i;
        break;
      }
      ++i;
    }
    if (body_open == std::string::npos) continue;
    std::string header = src.substr(decl, body_open - decl);
    size_t lp = header.find('(');
    if (lp == std::string::npos) continue;
    size_t name_end = lp;
    while (name_end > 0 &&
           std::isspace(static_cast<unsigned char>(header[name_end - 1])))
      --name_end;
    size_t name_begin = name_end;
    while (name_begin > 0 && ident_char(header[name_begin - 1])) --name_begin;
    if (name_begin == name_end) continue;

    int depth = 0;
    size_t j = body_open;
    size_t body_end = std::string::npos;
    while (j < src.size()) {
      if (skip_opaque(src, j)) continue;
      if (src[j] == '{') ++depth;
      if (src[j] == '}' && --depth == 0) {
        body_end = j + 1;
        break;
      }
      ++j;
    }
    if (body_end == std::string::npos) continue;

    MinedMethod m;
    m.name = header.substr(name_begin, name_end - name_begin);
    m.comment = std::move(comment);
    m.body = src.substr(decl, body_end - decl);
    out.push_back(std::move(m));
    pos = body_end;
  }
  return out;
}

// Isolates the @return clause of a Javadoc block: from the @return block
// tag through the last character before the next block tag or the end of
// the block. A block tag is an '@' opening a line's payload after frame
// stripping; inline tags ({@link ...}) open with '{' and never terminate
// the clause. Whitespace runs are collapsed to single spaces. Returns ""
// when the block has no @return tag.
inline std::string extract_return_clause(const std::string& javadoc_block) {
  std::string text = detail::strip_javadoc_frame(javadoc_block);
  std::string clause;
  bool inside = false;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    size_t payload = line.find_first_not_of(" \t\r");
    bool is_tag = payload != std::string::npos && line[payload] == '@';
    if (inside && is_tag) break;
    if (!inside && is_tag && line.compare(payload, 7, "@return") == 0)
      inside = true;
    if (inside) clause += line + " ";
    if (end == text.size()) break;
    start = end + 1;
  }
  std::string out;
  for (char c : clause) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

// Pairs documented methods by name across two versions of one file. Names
// that appear more than once in either version (overloads) are ambiguous
// and skipped. The record's comment fields carry only the @return clause,
// which is what downstream tokenization expects. Pairs where neither the
// body nor the clause changed are dropped here; everything else is left to
// the corpus filters.
inline std::vector<RawRecord> pair_documented_methods(
    const std::string& project, const std::string& commit_before,
    const std::string& commit_after, const std::vector<MinedMethod>& olds,
    const std::vector<MinedMethod>& news) {
  std::map<std::string, int> old_count, new_count;
  std::map<std::string, const MinedMethod*> old_by_name, new_by_name;
  for (const MinedMethod& m : olds) {
    ++old_count[m.name];
    old_by_name[m.name] = &m;
  }
  for (const MinedMethod& m : news) {
    ++new_count[m.name];
    new_by_name[m.name] = &m;
  }
  std::vector<RawRecord> out;
  for (const MinedMethod& m : olds) {
    if (old_count[m.name] != 1) continue;
    auto it = new_by_name.find(m.name);
    if (it == new_by_name.end() || new_count[m.name] != 1) continue;
    const MinedMethod& n = *it->second;
    std::string c_old = extract_return_clause(m.comment);
    std::string c_new = extract_return_clause(n.comment);
    if (c_old.empty() || c_new.empty()) continue;
    if (m.body == n.body && c_old == c_new) continue;
    RawRecord r;
    r.project = project;
    r.commit_before = commit_before;
    r.commit_after = commit_after;
    r.m_old = m.body;
    r.m_new = n.body;
    r.c_old = std::move(c_old);
    r.c_new = std::move(c_new);
    r.id = project + "/" + commit_after.substr(0, 8) + "/" + m.name;
    out.push_back(std::move(r));
  }
  return out;
}

// Walks first-parent history oldest-to-newest and mines every consecutive
// commit pair. Files added or deleted between the two commits contribute no
// pairs (one side has no methods). Requires the `git` tool on PATH.
inline std::vector<RawRecord> mine_repository(const std::string& repo,
                                              const std::string& project) {
  using namespace gitmine_detail;
  const std::string git = "git -C " + shell_quote(repo) + " ";
  CommandResult list = run_command(git + "rev-list --reverse --first-parent HEAD");
  if (list.status != 0)
    throw Error(ErrorCode::Io, "cannot read git history at " + repo);
  std::vector<std::string> commits = nonempty_lines(list.output);
  std::vector<RawRecord> records;
  for (size_t k = 0; k + 1 < commits.size(); ++k) {
    const std::string& before = commits[k];
    const std::string& after = commits[k + 1];
    CommandResult files = run_command(git + "diff --name-only " + before +
                                      " " + after + " -- '*.java'");
    if (files.status != 0) continue;
    for (const std::string& file : nonempty_lines(files.output)) {
      std::string old_src =
          run_command(git + "show " + before + ":" + shell_quote(file)).output;
      std::string new_src =
          run_command(git + "show " + after + ":" + shell_quote(file)).output;
      std::vector<RawRecord> pairs = pair_documented_methods(
          project, before, after, extract_documented_methods(old_src),
          extract_documented_methods(new_src));
      records.insert(records.end(), std::make_move_iterator(pairs.begin()),
                     std::make_move_iterator(pairs.end()));
    }
  }
  return records;
}

// True when a usable `git` binary is on PATH.
inline bool git_available() {
  return gitmine_detail::run_command("git --version").status == 0;
}

}  // namespace comet
