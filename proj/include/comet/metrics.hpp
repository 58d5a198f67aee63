#pragma once

// Sentence-level text metrics: exact match, 4-gram precision score (BLEU-4
// with add-one smoothing), alignment/fragmentation score (METEOR, exact +
// stem stages), edit-aware n-gram F1 (SARI), and source-penalized n-gram
// score (GLEU). All scores are deterministic; the heavy helpers reuse
// thread-local scratch buffers because corpus sweeps call them millions of
// times.
//
// Scales: bleu4/meteor/gleu/xmatch return [0,1]; sari returns [0,100]
// (its conventional scale). Corpus aggregation is the arithmetic mean of
// sentence scores, reported as percentages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "comet/porter_stemmer.hpp"
#include "comet/token.hpp"

namespace comet {

namespace metrics_detail {

// Small linear-scan interner: token text -> dense id (call-local).
struct Coder {
  std::vector<std::string_view> seen;
  void reset() { seen.clear(); }
  uint16_t id(const std::string& s) {
    for (size_t i = 0; i < seen.size(); ++i)
      if (seen[i] == s) return static_cast<uint16_t>(i);
    seen.push_back(s);
    return static_cast<uint16_t>(seen.size() - 1);
  }
  void encode(const std::vector<std::string>& toks,
              std::vector<uint16_t>& out) {
    out.clear();
    out.reserve(toks.size());
    for (const std::string& t : toks) out.push_back(id(t));
  }
};

// n-grams packed as up to four 16-bit (id+1) fields; one vector per n.
inline void collect_grams(const std::vector<uint16_t>& ids, int n,
                          std::vector<uint64_t>& out) {
  out.clear();
  if (static_cast<int>(ids.size()) < n) return;
  out.reserve(ids.size() - n + 1);
  for (size_t i = 0; i + n <= ids.size(); ++i) {
    uint64_t g = 0;
    for (int k = 0; k < n; ++k)
      g = (g << 16) | (static_cast<uint64_t>(ids[i + k]) + 1);
    out.push_back(g);
  }
  std::sort(out.begin(), out.end());
}

// |A ∩ B| as multisets, both sorted with repeats.
inline size_t multiset_overlap(const std::vector<uint64_t>& a,
                               const std::vector<uint64_t>& b) {
  size_t i = 0, j = 0, count = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

// A − B as multisets (both sorted); result sorted.
inline void multiset_minus(const std::vector<uint64_t>& a,
                           const std::vector<uint64_t>& b,
                           std::vector<uint64_t>& out) {
  out.clear();
  size_t i = 0, j = 0;
  while (i < a.size()) {
    if (j >= b.size() || a[i] < b[j]) {
      out.push_back(a[i]);
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
}

// A ∩ B as multisets (both sorted); result sorted.
inline void multiset_min(const std::vector<uint64_t>& a,
                         const std::vector<uint64_t>& b,
                         std::vector<uint64_t>& out) {
  out.clear();
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
}

struct Scratch {
  Coder coder;
  std::vector<uint16_t> ids_a, ids_b, ids_c;
  std::vector<uint64_t> ga, gb, gc, t1, t2, t3;
};

inline Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

// Geometric mean of the four modified precisions with add-one smoothing for
// n >= 2 when the clipped count is zero, times the brevity penalty.
inline double ngram_bp_score(const std::array<double, 4>& nums,
                             const std::array<double, 4>& dens,
                             size_t pred_len, size_t ref_len) {
  if (pred_len == 0) return 0.0;
  double product = 1.0;
  for (int n = 0; n < 4; ++n) {
    double num = nums[n], den = dens[n];
    if (n == 0) {
      if (num <= 0.0) return 0.0;
    } else if (num <= 0.0) {
      num = num + 1.0;
      den = den + 1.0;
    }
    product *= num / den;
  }
  double bp = 1.0;
  if (pred_len < ref_len)
    bp = std::exp(1.0 - static_cast<double>(ref_len) / pred_len);
  return bp * std::sqrt(std::sqrt(product));  // fourth root
}

}  // namespace metrics_detail

inline double xmatch(const std::vector<std::string>& pred,
                     const std::vector<std::string>& ref) {
  return pred == ref ? 1.0 : 0.0;
}

inline double bleu4(const std::vector<std::string>& pred,
                    const std::vector<std::string>& ref) {
  using namespace metrics_detail;
  if (pred.empty()) return 0.0;
  Scratch& s = scratch();
  s.coder.reset();
  s.coder.encode(pred, s.ids_a);
  s.coder.encode(ref, s.ids_b);
  std::array<double, 4> nums{}, dens{};
  for (int n = 1; n <= 4; ++n) {
    collect_grams(s.ids_a, n, s.ga);
    collect_grams(s.ids_b, n, s.gb);
    nums[n - 1] = static_cast<double>(multiset_overlap(s.ga, s.gb));
    dens[n - 1] = static_cast<double>(s.ga.size());
  }
  return ngram_bp_score(nums, dens, pred.size(), ref.size());
}

// Penalizes n-grams the prediction kept from the source that the reference
// rewrote: num_n = max(0, |C∩R| − |C∩(S−R)|).
inline double gleu(const std::vector<std::string>& source,
                   const std::vector<std::string>& pred,
                   const std::vector<std::string>& ref) {
  using namespace metrics_detail;
  if (pred.empty()) return 0.0;
  Scratch& s = scratch();
  s.coder.reset();
  s.coder.encode(source, s.ids_c);
  s.coder.encode(pred, s.ids_a);
  s.coder.encode(ref, s.ids_b);
  std::array<double, 4> nums{}, dens{};
  for (int n = 1; n <= 4; ++n) {
    collect_grams(s.ids_a, n, s.ga);
    collect_grams(s.ids_b, n, s.gb);
    collect_grams(s.ids_c, n, s.gc);
    double overlap = static_cast<double>(multiset_overlap(s.ga, s.gb));
    multiset_minus(s.gc, s.gb, s.t1);  // S − R
    double penalty = static_cast<double>(multiset_overlap(s.ga, s.t1));
    nums[n - 1] = std::max(0.0, overlap - penalty);
    dens[n - 1] = static_cast<double>(s.ga.size());
  }
  return ngram_bp_score(nums, dens, pred.size(), ref.size());
}

// ---------------------------------------------------------------------------
// METEOR (simplified): exact-match stage then Porter-stem stage, each taking
// the maximum number of matches; among all maximal alignments the chunk count
// is minimized (exhaustive search with a node cap, greedy beyond it).
// ---------------------------------------------------------------------------

namespace metrics_detail {

struct MeteorAlignment {
  size_t matches = 0;
  size_t chunks = 0;
};

struct MeteorSearcher {
  const std::vector<int>* text_id;       // per pred position
  const std::vector<int>* stem_id;       // per pred position
  const std::vector<int>* ref_text_id;   // per ref position
  const std::vector<int>* ref_stem_id;   // per ref position
  std::vector<int> q1;                   // per text id: stage1 quota left
  std::vector<int> q2;                   // per stem id: stage2 quota left
  std::vector<int> pred_text_left;       // copies of text id at or after p
  std::vector<int> ref_text_free;        // unused ref copies per text id
  std::vector<char> ref_used;
  size_t target_matches = 0;
  size_t best = 0;
  long nodes = 0;
  long node_cap = 2'000'000;
  bool capped = false;

  size_t P() const { return text_id->size(); }
  size_t R() const { return ref_text_id->size(); }

  void dfs(size_t p, size_t matched, size_t chunks, size_t last_p,
           size_t last_r, bool have_last) {
    if (++nodes > node_cap) {
      capped = true;
      return;
    }
    if (chunks >= best) return;  // only improvements matter
    if (matched == target_matches) {
      best = chunks;
      return;
    }
    if (p >= P()) return;
    size_t need = target_matches - matched;
    if (P() - p < need) return;

    int v = (*text_id)[p];
    int sdm = (*stem_id)[p];

    // Try matches first (better pruning), then leaving p unmatched.
    for (size_t r = 0; r < R(); ++r) {
      if (ref_used[r]) continue;
      bool s1 = q1[v] > 0 && (*ref_text_id)[r] == v;
      bool s2 = !s1 && q2[sdm] > 0 && (*ref_stem_id)[r] == sdm &&
                (*ref_text_id)[r] != v &&
                ref_text_free[(*ref_text_id)[r]] - 1 >= q1[(*ref_text_id)[r]];
      if (s2) {
        // p itself must remain able to satisfy its text's stage1 quota.
        if (pred_text_left[v] - 1 < q1[v]) s2 = false;
      }
      if (!s1 && !s2) continue;
      size_t nchunks =
          chunks + ((have_last && p == last_p + 1 && r == last_r + 1) ? 0 : 1);
      int rv = (*ref_text_id)[r];
      ref_used[r] = 1;
      --ref_text_free[rv];
      --pred_text_left[v];
      if (s1)
        --q1[v];
      else
        --q2[sdm];
      dfs(p + 1, matched + 1, nchunks, p, r, true);
      if (s1)
        ++q1[v];
      else
        ++q2[sdm];
      ++pred_text_left[v];
      ++ref_text_free[rv];
      ref_used[r] = 0;
      if (capped) return;
    }
    // Leave p unmatched, if stage1 quota for v can still be met without it.
    if (pred_text_left[v] - 1 >= q1[v]) {
      --pred_text_left[v];
      dfs(p + 1, matched, chunks, last_p, last_r, have_last);
      ++pred_text_left[v];
    }
  }
};

inline MeteorAlignment meteor_align(const std::vector<std::string>& pred,
                                    const std::vector<std::string>& ref) {
  MeteorAlignment out;
  if (pred.empty() || ref.empty()) return out;

  // Dense ids for texts and stems across both sides.
  Coder text_coder, stem_coder;
  std::vector<int> pt, rt, ps, rs;
  std::vector<std::string> stems_p, stems_r;
  for (const std::string& w : pred) {
    pt.push_back(text_coder.id(w));
    stems_p.push_back(porter_stem(w));
  }
  for (const std::string& w : ref) {
    rt.push_back(text_coder.id(w));
    stems_r.push_back(porter_stem(w));
  }
  for (const std::string& w : stems_p) ps.push_back(stem_coder.id(w));
  for (const std::string& w : stems_r) rs.push_back(stem_coder.id(w));

  size_t ntext = text_coder.seen.size();
  size_t nstem = stem_coder.seen.size();
  std::vector<int> cnt_p(ntext, 0), cnt_r(ntext, 0);
  for (int v : pt) ++cnt_p[v];
  for (int v : rt) ++cnt_r[v];

  // Stage 1 (exact) quotas, then stage 2 (stem) quotas on the residuals.
  std::vector<int> m1(ntext, 0);
  for (size_t v = 0; v < ntext; ++v) m1[v] = std::min(cnt_p[v], cnt_r[v]);
  std::vector<int> rp_stem(nstem, 0), rr_stem(nstem, 0);
  {
    std::vector<int> rp(ntext, 0), rr(ntext, 0);
    for (size_t v = 0; v < ntext; ++v) {
      rp[v] = cnt_p[v] - m1[v];
      rr[v] = cnt_r[v] - m1[v];
    }
    // Map each text id to its stem id (one representative suffices).
    std::vector<int> text_stem(ntext, -1);
    for (size_t i = 0; i < pt.size(); ++i) text_stem[pt[i]] = ps[i];
    for (size_t i = 0; i < rt.size(); ++i) text_stem[rt[i]] = rs[i];
    for (size_t v = 0; v < ntext; ++v) {
      if (text_stem[v] < 0) continue;
      rp_stem[text_stem[v]] += rp[v];
      rr_stem[text_stem[v]] += rr[v];
    }
  }
  std::vector<int> m2(nstem, 0);
  size_t total = 0;
  for (size_t v = 0; v < ntext; ++v) total += m1[v];
  for (size_t s = 0; s < nstem; ++s) {
    m2[s] = std::min(rp_stem[s], rr_stem[s]);
    total += m2[s];
  }
  out.matches = total;
  if (total == 0) return out;

  // Greedy alignment first: left-to-right, prefer continuing the run.
  auto greedy = [&]() -> size_t {
    std::vector<int> q1 = m1, q2 = m2;
    std::vector<char> used(ref.size(), 0);
    size_t chunks = 0, matched = 0;
    bool have_last = false;
    size_t last_r = 0;
    size_t last_p = 0;
    // Which pred copies take stage1: the first m1[v] of each text.
    std::vector<int> text_seen(ntext, 0);
    std::vector<int> stage(pred.size(), 0);  // 0 none, 1 exact, 2 stem
    {
      std::vector<int> q2_left = m2;
      std::vector<int> stage2_used_by_stem(nstem, 0);
      for (size_t p = 0; p < pred.size(); ++p) {
        int v = pt[p];
        if (text_seen[v] < m1[v]) {
          stage[p] = 1;
          ++text_seen[v];
        } else if (q2_left[ps[p]] > 0) {
          stage[p] = 2;
          --q2_left[ps[p]];
        }
      }
      (void)stage2_used_by_stem;
    }
    // Ref capacity bookkeeping: reserve stage1 demand per text.
    std::vector<int> ref_free(ntext, 0);
    for (int v : rt) ++ref_free[v];
    for (size_t p = 0; p < pred.size(); ++p) {
      if (stage[p] == 0) continue;
      int v = pt[p];
      size_t pick = ref.size();
      for (size_t r = 0; r < ref.size(); ++r) {
        if (used[r]) continue;
        bool legal;
        if (stage[p] == 1) {
          legal = rt[r] == v;
        } else {
          legal = rs[r] == ps[p] && rt[r] != v &&
                  ref_free[rt[r]] - 1 >= q1[rt[r]];
        }
        if (!legal) continue;
        if (have_last && p == last_p + 1 && r == last_r + 1) {
          pick = r;
          break;  // continuation is always best
        }
        if (pick == ref.size()) pick = r;
      }
      if (pick == ref.size()) continue;  // greedy may fail to place; fine
      chunks += (have_last && p == last_p + 1 && pick == last_r + 1) ? 0 : 1;
      used[pick] = 1;
      --ref_free[rt[pick]];
      if (stage[p] == 1) --q1[v];
      have_last = true;
      last_p = p;
      last_r = pick;
      ++matched;
    }
    return matched == total ? chunks : total;  // worst case: 1 chunk per match
  };

  MeteorSearcher search;
  search.text_id = &pt;
  search.stem_id = &ps;
  search.ref_text_id = &rt;
  search.ref_stem_id = &rs;
  search.q1 = m1;
  search.q2 = m2;
  search.pred_text_left.assign(ntext, 0);
  for (int v : pt) ++search.pred_text_left[v];
  search.ref_text_free.assign(ntext, 0);
  for (int v : rt) ++search.ref_text_free[v];
  search.ref_used.assign(ref.size(), 0);
  search.target_matches = total;
  search.best = greedy() + 1;  // upper bound (exclusive prune threshold)
  size_t greedy_chunks = search.best - 1;
  search.dfs(0, 0, 0, 0, 0, false);
  out.chunks = search.capped ? std::min(greedy_chunks, search.best)
                             : search.best;
  if (out.chunks > greedy_chunks) out.chunks = greedy_chunks;
  return out;
}

}  // namespace metrics_detail

inline double meteor(const std::vector<std::string>& pred,
                     const std::vector<std::string>& ref) {
  using namespace metrics_detail;
  MeteorAlignment a = meteor_align(pred, ref);
  if (a.matches == 0) return 0.0;
  double m = static_cast<double>(a.matches);
  double p = m / pred.size();
  double r = m / ref.size();
  double f = (p * r) / (0.9 * p + 0.1 * r);
  double frag = static_cast<double>(a.chunks) / m;
  double penalty = 0.5 * frag * frag * frag;
  return f * (1.0 - penalty);
}

// ---------------------------------------------------------------------------
// SARI with a single reference: F1 over kept / deleted / added n-gram
// multisets, n = 1..4, averaged over n then over the three ops, scaled to
// [0,100]. Empty-vs-empty op sets count as perfect.
// ---------------------------------------------------------------------------

inline double sari(const std::vector<std::string>& source,
                   const std::vector<std::string>& pred,
                   const std::vector<std::string>& ref) {
  using namespace metrics_detail;
  Scratch& s = scratch();
  s.coder.reset();
  s.coder.encode(source, s.ids_c);
  s.coder.encode(pred, s.ids_a);
  s.coder.encode(ref, s.ids_b);

  auto op_f1 = [](size_t pred_n, size_t target_n, size_t good) {
    double p = pred_n > 0 ? static_cast<double>(good) / pred_n
                          : (target_n == 0 ? 1.0 : 0.0);
    double r = target_n > 0 ? static_cast<double>(good) / target_n
                            : (pred_n == 0 ? 1.0 : 0.0);
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  };

  double keep_sum = 0.0, del_sum = 0.0, add_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    collect_grams(s.ids_c, n, s.gc);  // S
    collect_grams(s.ids_a, n, s.ga);  // C
    collect_grams(s.ids_b, n, s.gb);  // R

    // KEEP: S∩C vs S∩R
    multiset_min(s.gc, s.ga, s.t1);
    multiset_min(s.gc, s.gb, s.t2);
    keep_sum += op_f1(s.t1.size(), s.t2.size(), multiset_overlap(s.t1, s.t2));

    // DELETE: S−C vs S−R
    multiset_minus(s.gc, s.ga, s.t1);
    multiset_minus(s.gc, s.gb, s.t2);
    del_sum += op_f1(s.t1.size(), s.t2.size(), multiset_overlap(s.t1, s.t2));

    // ADD: C−S vs R−S
    multiset_minus(s.ga, s.gc, s.t1);
    multiset_minus(s.gb, s.gc, s.t2);
    add_sum += op_f1(s.t1.size(), s.t2.size(), multiset_overlap(s.t1, s.t2));
  }
  return 100.0 * (keep_sum / 4.0 + del_sum / 4.0 + add_sum / 4.0) / 3.0;
}

// ---------------------------------------------------------------------------
// Corpus-level aggregation: arithmetic mean of sentence scores. Metrics with
// a [0,1] sentence scale are reported as percentages; sari already lives on
// [0,100].
// ---------------------------------------------------------------------------

struct CorpusScores {
  size_t count = 0;
  double xmatch_pct = 0.0;
  double bleu4_pct = 0.0;
  double meteor_pct = 0.0;
  double sari_score = 0.0;
  double gleu_pct = 0.0;
};

inline CorpusScores corpus_metrics(
    const std::vector<std::vector<std::string>>& sources,
    const std::vector<std::vector<std::string>>& preds,
    const std::vector<std::vector<std::string>>& refs) {
  CorpusScores out;
  out.count = preds.size();
  if (preds.size() != refs.size() || sources.size() != preds.size())
    throw Error(ErrorCode::BadRecord,
                "corpus metric inputs have mismatched lengths");
  if (preds.empty()) return out;
  for (size_t i = 0; i < preds.size(); ++i) {
    out.xmatch_pct += xmatch(preds[i], refs[i]);
    out.bleu4_pct += bleu4(preds[i], refs[i]);
    out.meteor_pct += meteor(preds[i], refs[i]);
    out.sari_score += sari(sources[i], preds[i], refs[i]);
    out.gleu_pct += gleu(sources[i], preds[i], refs[i]);
  }
  double n = static_cast<double>(preds.size());
  out.xmatch_pct = 100.0 * out.xmatch_pct / n;
  out.bleu4_pct = 100.0 * out.bleu4_pct / n;
  out.meteor_pct = 100.0 * out.meteor_pct / n;
  out.sari_score = out.sari_score / n;
  out.gleu_pct = 100.0 * out.gleu_pct / n;
  return out;
}

// TokenSeq conveniences.
inline double xmatch(const TokenSeq& p, const TokenSeq& r) {
  return xmatch(p.texts(), r.texts());
}
inline double bleu4(const TokenSeq& p, const TokenSeq& r) {
  return bleu4(p.texts(), r.texts());
}
inline double meteor(const TokenSeq& p, const TokenSeq& r) {
  return meteor(p.texts(), r.texts());
}
inline double sari(const TokenSeq& s, const TokenSeq& p, const TokenSeq& r) {
  return sari(s.texts(), p.texts(), r.texts());
}
inline double gleu(const TokenSeq& s, const TokenSeq& p, const TokenSeq& r) {
  return gleu(s.texts(), p.texts(), r.texts());
}

}  // namespace comet
