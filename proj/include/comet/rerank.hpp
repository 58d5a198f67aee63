#pragma once

// Candidate re-scoring. Beam output is reordered by a linear combination of
// the (exponentiated) beam score, the likelihood of the resulting comment
// under a stand-alone generation model, and the similarity of the resulting
// comment to the comment being updated. The generation reranker drops the
// likelihood term and splits the weight evenly between the other two.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "comet/metrics.hpp"
#include "comet/model.hpp"
#include "comet/token.hpp"

namespace comet {

struct RerankWeights {
  double beam = 0.5;
  double generation = 0.3;
  double similarity = 0.2;
};

inline RerankWeights generation_rerank_weights() { return {0.5, 0.0, 0.5}; }

// Maps a length-normalized log-probability onto the same [0, 1] scale as the
// metric components.
inline double beam_component(double normalized_log_prob) {
  return std::exp(normalized_log_prob);
}

namespace rerank_detail {

// Stable descending sort by combined score: ties keep original beam rank.
inline void sort_by_combined(std::vector<Candidate>& cs) {
  std::vector<size_t> order(cs.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return cs[a].combined > cs[b].combined;
  });
  std::vector<Candidate> out;
  out.reserve(cs.size());
  for (size_t i : order) out.push_back(std::move(cs[i]));
  cs = std::move(out);
}

}  // namespace rerank_detail

// Edit-model reranking. `gen_likelihood` scores a candidate's resulting
// comment under the generation model (already length-normalized to [0, 1]);
// it is injected as a callable so the combination arithmetic stays testable
// with hand-picked values.
inline std::vector<Candidate> rerank_edit(
    std::vector<Candidate> candidates, const TokenSeq& c_old,
    const std::function<double(const Candidate&)>& gen_likelihood,
    const RerankWeights& w = RerankWeights{}) {
  for (Candidate& c : candidates) {
    c.gen_score = gen_likelihood ? gen_likelihood(c) : 0.0;
    c.similarity = meteor(c.parsed.texts(), c_old.texts());
    c.combined = w.beam * beam_component(c.beam_score) +
                 w.generation * c.gen_score + w.similarity * c.similarity;
  }
  rerank_detail::sort_by_combined(candidates);
  return candidates;
}

// Convenience overload wiring the generation model in directly; `e` supplies
// the code context the generation model conditions on.
template <typename S>
inline std::vector<Candidate> rerank_edit(
    std::vector<Candidate> candidates, const Example& e,
    const SequenceModel<S>& generation_model,
    const RerankWeights& w = RerankWeights{}) {
  return rerank_edit(
      std::move(candidates), e.c_old,
      [&](const Candidate& c) {
        return generation_model.generation_likelihood(c.parsed, e);
      },
      w);
}

// Generation-model reranking: no likelihood term, weight split evenly
// between the beam score and the similarity to the comment being updated.
inline std::vector<Candidate> rerank_generation(
    std::vector<Candidate> candidates, const TokenSeq& c_old,
    const RerankWeights& w = generation_rerank_weights()) {
  for (Candidate& c : candidates) {
    c.gen_score = 0.0;
    c.similarity = meteor(c.parsed.texts(), c_old.texts());
    c.combined =
        w.beam * beam_component(c.beam_score) + w.similarity * c.similarity;
  }
  rerank_detail::sort_by_combined(candidates);
  return candidates;
}

}  // namespace comet
