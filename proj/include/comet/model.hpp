#pragma once

// Sequence models over the edit lexicon: a comment-edit model (encoders
// over the old comment and a code-change representation, decoder over edit
// sequences or full comments, split attention, pointer copy) and the plain
// generation model (method-to-comment) as the degenerate configuration
// m_new -> c_new. Includes teacher-forced training with early stopping,
// length-normalized beam search, teacher-forced likelihood scoring, and a
// self-describing binary checkpoint format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "comet/corpus.hpp"
#include "comet/edit_apply.hpp"
#include "comet/edit_lexicon.hpp"
#include "comet/features.hpp"
#include "comet/nn.hpp"
#include "comet/token.hpp"
#include "comet/vocab.hpp"

namespace comet {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class InputRepr { MNew, MOldAndMNew, MEdit };
enum class OutputRepr { CNew, CEdit };

inline const char* input_repr_name(InputRepr r) {
  switch (r) {
    case InputRepr::MNew: return "m_new";
    case InputRepr::MOldAndMNew: return "m_old_and_m_new";
    case InputRepr::MEdit: return "m_edit";
  }
  return "m_edit";
}

inline InputRepr input_repr_from(const std::string& s) {
  if (s == "m_new") return InputRepr::MNew;
  if (s == "m_old_and_m_new") return InputRepr::MOldAndMNew;
  if (s == "m_edit") return InputRepr::MEdit;
  throw Error(ErrorCode::BadConfig, "unknown input_repr '" + s + "'");
}

inline const char* output_repr_name(OutputRepr r) {
  return r == OutputRepr::CNew ? "c_new" : "c_edit";
}

inline OutputRepr output_repr_from(const std::string& s) {
  if (s == "c_new") return OutputRepr::CNew;
  if (s == "c_edit") return OutputRepr::CEdit;
  throw Error(ErrorCode::BadConfig, "unknown output_repr '" + s + "'");
}

struct ModelConfig {
  int embedding_dim = 64;
  int encoder_hidden = 64;  // per direction
  int encoder_layers = 2;   // bidirectional
  int decoder_hidden = 128;
  double dropout = 0.6;
  int batch_size = 100;
  double learning_rate = 0.001;
  int beam_width = 20;
  int patience = 10;   // early-stop after this many non-improving epochs
  int max_epochs = 100;
  int max_decode_len = 80;
  bool use_features = true;  // honored for the m_edit input representation
  uint64_t seed = 1;
  InputRepr input_repr = InputRepr::MEdit;
  OutputRepr output_repr = OutputRepr::CEdit;

  // The m_new -> c_new configuration is the stand-alone generation model;
  // every other configuration also encodes the old comment.
  bool has_comment_encoder() const {
    return !(input_repr == InputRepr::MNew && output_repr == OutputRepr::CNew);
  }
  int code_encoder_count() const {
    return input_repr == InputRepr::MOldAndMNew ? 2 : 1;
  }
  bool features_active() const {
    return use_features && input_repr == InputRepr::MEdit;
  }
};

inline std::string config_to_text(const ModelConfig& c) {
  std::ostringstream out;
  out << "embedding_dim=" << c.embedding_dim << "\n"
      << "encoder_hidden=" << c.encoder_hidden << "\n"
      << "encoder_layers=" << c.encoder_layers << "\n"
      << "decoder_hidden=" << c.decoder_hidden << "\n"
      << "dropout=" << c.dropout << "\n"
      << "batch_size=" << c.batch_size << "\n"
      << "learning_rate=" << c.learning_rate << "\n"
      << "beam_width=" << c.beam_width << "\n"
      << "patience=" << c.patience << "\n"
      << "max_epochs=" << c.max_epochs << "\n"
      << "max_decode_len=" << c.max_decode_len << "\n"
      << "use_features=" << (c.use_features ? "true" : "false") << "\n"
      << "seed=" << c.seed << "\n"
      << "input_repr=" << input_repr_name(c.input_repr) << "\n"
      << "output_repr=" << output_repr_name(c.output_repr) << "\n";
  return out.str();
}

// Parses key=value lines ('#' comments and blank lines allowed). Unknown
// keys are configuration errors, never silently ignored.
inline ModelConfig config_from_text(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::BadConfig,
                  "config line " + std::to_string(line_no) + " has no '='");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "embedding_dim") c.embedding_dim = std::stoi(value);
      else if (key == "encoder_hidden") c.encoder_hidden = std::stoi(value);
      else if (key == "encoder_layers") c.encoder_layers = std::stoi(value);
      else if (key == "decoder_hidden") c.decoder_hidden = std::stoi(value);
      else if (key == "dropout") c.dropout = std::stod(value);
      else if (key == "batch_size") c.batch_size = std::stoi(value);
      else if (key == "learning_rate") c.learning_rate = std::stod(value);
      else if (key == "beam_width") c.beam_width = std::stoi(value);
      else if (key == "patience") c.patience = std::stoi(value);
      else if (key == "max_epochs") c.max_epochs = std::stoi(value);
      else if (key == "max_decode_len") c.max_decode_len = std::stoi(value);
      else if (key == "use_features") c.use_features = (value == "true" || value == "1");
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "input_repr") c.input_repr = input_repr_from(value);
      else if (key == "output_repr") c.output_repr = output_repr_from(value);
      else
        throw Error(ErrorCode::BadConfig, "unknown config key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadConfig,
                  "bad value for config key '" + key + "': " + value);
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Vocabulary assembly
// ---------------------------------------------------------------------------

// The code-side token streams the model consumes for one example, per the
// configured input representation.
inline std::vector<std::vector<std::string>> code_streams_of(
    const Example& e, InputRepr repr) {
  switch (repr) {
    case InputRepr::MNew:
      return {e.m_new.texts()};
    case InputRepr::MOldAndMNew:
      return {e.m_old.texts(), e.m_new.texts()};
    case InputRepr::MEdit:
      return {serialize(e.m_edit)};
  }
  return {};
}

inline std::vector<std::string> target_texts_of(const Example& e,
                                                OutputRepr repr) {
  return repr == OutputRepr::CEdit ? serialize(e.c_edit) : e.c_new.texts();
}

inline Vocabulary build_code_vocabulary(const std::vector<Example>& examples,
                                        InputRepr repr,
                                        size_t min_count = 2) {
  std::vector<std::vector<std::string>> docs;
  for (const Example& e : examples) {
    std::vector<std::vector<std::string>> streams = code_streams_of(e, repr);
    for (std::vector<std::string>& s : streams) docs.push_back(std::move(s));
  }
  return build_vocabulary(docs, min_count, /*with_edit_keywords=*/true);
}

inline Vocabulary build_comment_vocabulary(
    const std::vector<Example>& examples, size_t min_count = 2) {
  std::vector<std::vector<std::string>> docs;
  for (const Example& e : examples) {
    docs.push_back(e.c_old.texts());
    docs.push_back(e.c_new.texts());
  }
  return build_vocabulary(docs, min_count, /*with_edit_keywords=*/true);
}

// ---------------------------------------------------------------------------
// Decoded candidates and training logs
// ---------------------------------------------------------------------------

struct Candidate {
  std::vector<int> ids;             // extended-vocabulary ids, no SOS/EOS
  std::vector<std::string> tokens;  // surface texts of ids
  double beam_score = 0.0;          // length-normalized log-probability
  TokenSeq parsed{TokenSource::Comment};  // resulting comment
  bool parse_ok = true;
  // Reranking components (filled by the reranker).
  double gen_score = 0.0;
  double similarity = 0.0;
  double combined = 0.0;
};

struct EpochLog {
  int epoch = 0;
  double train_nll = 0.0;
  double valid_nll = 0.0;
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_valid_nll = 0.0;
  bool early_stopped = false;
};

// ---------------------------------------------------------------------------
// The model
// ---------------------------------------------------------------------------

template <typename S>
class SequenceModel {
 public:
  SequenceModel(ModelConfig cfg, Vocabulary code_vocab,
                Vocabulary comment_vocab)
      : cfg_(std::move(cfg)),
        code_vocab_(std::move(code_vocab)),
        comment_vocab_(std::move(comment_vocab)) {
    validate_config();
    if (code_vocab_.size() <= 4 || comment_vocab_.size() <= 4)
      throw Error(ErrorCode::VocabularyMissing,
                  "vocabularies must contain tokens beyond the specials");
    std::mt19937_64 rng(cfg_.seed);
    create_parameters(rng);
  }

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& code_vocab() const { return code_vocab_; }
  const Vocabulary& comment_vocab() const { return comment_vocab_; }
  ParamStore<S>& params() { return store_; }
  const ParamStore<S>& params() const { return store_; }

  // Copies embedding tables (and nothing else) from a pre-trained model
  // where names and shapes agree; used to warm-start from the generation
  // model.
  template <typename T>
  void init_embeddings_from(const SequenceModel<T>& other) {
    for (const char* name : {"emb.code", "emb.comment"}) {
      const Param<T>* src =
          const_cast<SequenceModel<T>&>(other).params().find(name);
      Param<S>* dst = store_.find(name);
      if (src && dst && src->value.rows() == dst->value.rows() &&
          src->value.cols() == dst->value.cols())
        dst->value = src->value.template cast<S>();
    }
  }

  // -------------------------------------------------------------------------
  // Loss-bearing forward passes
  // -------------------------------------------------------------------------

  // Mean NLL per target token over the batch, forward only.
  double loss_value(const std::vector<Example>& batch) const {
    Graph<S> g;
    std::mt19937_64 rng(0);
    Var<S> loss =
        const_cast<SequenceModel*>(this)->batch_loss(g, batch, false, rng);
    return static_cast<double>(loss.value()(0, 0));
  }

  // Forward + backward; adds gradients into the parameter store (caller
  // zeroes grads). Returns the loss value.
  double accumulate_gradients(const std::vector<Example>& batch,
                              bool train_mode = false,
                              uint64_t dropout_seed = 0) {
    Graph<S> g;
    std::mt19937_64 rng(dropout_seed);
    Var<S> loss = batch_loss(g, batch, train_mode, rng);
    g.backward(loss);
    return static_cast<double>(loss.value()(0, 0));
  }

  // Central-difference verification of d(loss)/d(theta) for every scalar
  // parameter. Returns the maximum relative error. Dropout off.
  double gradient_check(const std::vector<Example>& batch,
                        double eps = 1e-5) {
    store_.zero_grads();
    accumulate_gradients(batch, false, 0);
    double worst = 0.0;
    for (const std::string& name : store_.names()) {
      Param<S>& p = *store_.find(name);
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
        for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
          const S orig = p.value(r, c);
          p.value(r, c) = orig + static_cast<S>(eps);
          const double up = loss_value(batch);
          p.value(r, c) = orig - static_cast<S>(eps);
          const double down = loss_value(batch);
          p.value(r, c) = orig;
          const double numeric = (up - down) / (2 * eps);
          const double analytic = static_cast<double>(p.grad(r, c));
          const double scale =
              std::max({1.0, std::abs(numeric), std::abs(analytic)});
          worst = std::max(worst, std::abs(numeric - analytic) / scale);
        }
      }
    }
    return worst;
  }

  // -------------------------------------------------------------------------
  // Training
  // -------------------------------------------------------------------------

  TrainResult fit(const std::vector<Example>& train_set,
                  const std::vector<Example>& valid_set) {
    if (train_set.empty())
      throw Error(ErrorCode::EmptyCorpus, "training set is empty");
    AdamOptimizer<S> opt(cfg_.learning_rate);
    std::mt19937_64 shuffle_rng(cfg_.seed ^ 0x9e3779b97f4a7c15ull);
    std::mt19937_64 dropout_rng(cfg_.seed * 0x100000001b3ull + 7);

    TrainResult result;
    result.best_valid_nll = std::numeric_limits<double>::infinity();
    std::map<std::string, Mat<S>> best_values;
    int since_best = 0;

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg_.max_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), shuffle_rng);
      double train_nll_sum = 0.0;
      size_t train_tokens = 0;
      for (size_t at = 0; at < order.size();
           at += static_cast<size_t>(cfg_.batch_size)) {
        std::vector<Example> batch;
        for (size_t k = at;
             k < order.size() && k < at + static_cast<size_t>(cfg_.batch_size);
             ++k)
          batch.push_back(train_set[order[k]]);
        size_t tokens = target_token_count(batch);
        store_.zero_grads();
        double nll =
            accumulate_gradients(batch, true, dropout_rng());
        opt.step(store_);
        train_nll_sum += nll * static_cast<double>(tokens);
        train_tokens += tokens;
      }

      EpochLog log;
      log.epoch = epoch;
      log.train_nll =
          train_tokens ? train_nll_sum / static_cast<double>(train_tokens) : 0;
      log.valid_nll = valid_set.empty() ? log.train_nll
                                        : batched_loss_value(valid_set);
      if (log.valid_nll < result.best_valid_nll - 1e-12) {
        result.best_valid_nll = log.valid_nll;
        result.best_epoch = epoch;
        log.improved = true;
        since_best = 0;
        if (!valid_set.empty()) snapshot(best_values);
      } else {
        ++since_best;
      }
      result.log.push_back(log);
      if (!valid_set.empty() && since_best >= cfg_.patience) {
        result.early_stopped = true;
        break;
      }
    }
    if (!best_values.empty()) restore(best_values);
    return result;
  }

  // -------------------------------------------------------------------------
  // Decoding
  // -------------------------------------------------------------------------

  std::vector<Candidate> beam_search(const Example& e, int beam_width) const {
    if (beam_width < 1)
      throw Error(ErrorCode::BadConfig, "beam width must be >= 1");
    Instance inst = make_instance(e, /*with_target=*/false);
    auto* self = const_cast<SequenceModel*>(this);

    // One persistent graph holds the encoder pass and every decode step;
    // nothing needs gradients at inference.
    Graph<S> g;
    std::mt19937_64 rng(0);
    ParamVars pv = self->bind_params(g);
    Forward fwd = self->encode_instance(g, pv, inst, false, rng);

    struct Beam {
      std::vector<int> ids;  // extended ids emitted so far
      double logp = 0.0;
      Var<S> h;
      bool done = false;
    };
    auto normalized = [](const Beam& b) {
      size_t len = b.ids.size() + 1;  // count the end token
      return b.logp / static_cast<double>(len);
    };

    std::vector<Beam> live(1);
    live[0].h = fwd.s0;
    std::vector<Beam> finished;
    const int v = static_cast<int>(comment_vocab_.size());

    for (int step = 0; step < cfg_.max_decode_len && !live.empty(); ++step) {
      struct Next {
        size_t beam;
        int id;
        double logp;
      };
      std::vector<Next> expansions;
      for (size_t bi = 0; bi < live.size(); ++bi) {
        Beam& b = live[bi];
        int prev = b.ids.empty() ? Vocabulary::kSos
                                 : embedding_id_for(b.ids.back());
        Var<S> x = embed_comment(pv, prev);
        StepOut so = self->decode_step(g, pv, fwd, b.h, x, false, rng);
        b.h = so.h;
        const Mat<S>& dist = so.dist.value();
        for (int id = 0; id < static_cast<int>(dist.rows()); ++id) {
          if (id == Vocabulary::kPad || id == Vocabulary::kSos) continue;
          double p = static_cast<double>(dist(id, 0));
          if (p <= 0) continue;
          expansions.push_back({bi, id, b.logp + std::log(p)});
        }
      }
      std::stable_sort(expansions.begin(), expansions.end(),
                       [](const Next& a, const Next& b) {
                         return a.logp > b.logp;
                       });
      std::vector<Beam> next;
      for (const Next& n : expansions) {
        if (static_cast<int>(next.size()) >= beam_width) break;
        Beam b = live[n.beam];
        b.logp = n.logp;
        if (n.id == Vocabulary::kEos) {
          b.done = true;
          finished.push_back(std::move(b));
          continue;
        }
        b.ids.push_back(n.id);
        next.push_back(std::move(b));
      }
      live = std::move(next);
      if (static_cast<int>(finished.size()) >= beam_width) break;
    }
    for (Beam& b : live) finished.push_back(std::move(b));  // ran out of steps

    std::stable_sort(finished.begin(), finished.end(),
                     [&](const Beam& a, const Beam& b) {
                       return normalized(a) > normalized(b);
                     });
    if (static_cast<int>(finished.size()) > beam_width)
      finished.resize(static_cast<size_t>(beam_width));

    std::vector<Candidate> out;
    for (const Beam& b : finished) {
      Candidate c;
      c.ids = b.ids;
      for (int id : b.ids) c.tokens.push_back(text_for(id, inst, v));
      c.beam_score = normalized(b);
      parse_candidate(e, c);
      out.push_back(std::move(c));
    }
    return out;
  }

  Candidate predict(const Example& e) const {
    std::vector<Candidate> c = beam_search(e, cfg_.beam_width);
    return c.front();
  }

  // Teacher-forced decoder distributions over the extended vocabulary, one
  // column per target step (gold target incl. the end token). Row order:
  // comment vocabulary first, then this example's copyable out-of-vocabulary
  // source tokens. Diagnostic surface for tests and debugging.
  std::vector<Mat<S>> teacher_forced_distributions(const Example& e) const {
    Instance inst = make_instance(e, /*with_target=*/true);
    auto* self = const_cast<SequenceModel*>(this);
    Graph<S> g;
    std::mt19937_64 rng(0);
    ParamVars pv = self->bind_params(g);
    Forward fwd = self->encode_instance(g, pv, inst, false, rng);
    std::vector<Mat<S>> dists;
    Var<S> h = fwd.s0;
    for (size_t t = 0; t < inst.target_in_ids.size(); ++t) {
      Var<S> x = embed_comment(pv, inst.target_in_ids[t]);
      StepOut so = self->decode_step(g, pv, fwd, h, x, false, rng);
      h = so.h;
      dists.push_back(so.dist.value());
    }
    return dists;
  }

  // Extended-vocabulary ids of the gold target (plus end token) for this
  // example, aligned with teacher_forced_distributions.
  std::vector<int> gold_extended_ids(const Example& e) const {
    return make_instance(e, /*with_target=*/true).target_out_ext;
  }

  // Teacher-forced, length-normalized probability of producing exactly the
  // given comment for this example: P(comment | inputs)^(1/N) over the N
  // comment tokens (the end-of-sequence step is not scored). Empty comments
  // score 0 by convention.
  double generation_likelihood(const TokenSeq& comment,
                               const Example& e) const {
    std::vector<std::string> texts = comment.texts();
    if (texts.empty()) return 0.0;
    Instance inst = make_instance(e, /*with_target=*/false);
    attach_target_texts(inst, texts, /*score_eos=*/false);
    auto* self = const_cast<SequenceModel*>(this);
    Graph<S> g;
    std::mt19937_64 rng(0);
    ParamVars pv = self->bind_params(g);
    Forward fwd = self->encode_instance(g, pv, inst, false, rng);
    double log_sum = 0.0;
    Var<S> h = fwd.s0;
    for (size_t t = 0; t < inst.target_in_ids.size(); ++t) {
      Var<S> x = embed_comment(pv, inst.target_in_ids[t]);
      StepOut so = self->decode_step(g, pv, fwd, h, x, false, rng);
      h = so.h;
      log_sum += std::log(
          static_cast<double>(so.dist.value()(inst.target_out_ext[t], 0)));
    }
    return std::exp(log_sum / static_cast<double>(texts.size()));
  }

 private:
  // ---------------------------------------------------------------------
  // Instances: examples resolved to ids, features and copy tables
  // ---------------------------------------------------------------------

  struct Instance {
    std::vector<std::vector<std::string>> code_texts;  // per code encoder
    std::vector<std::vector<int>> code_ids;
    std::vector<Mat<S>> code_feats;  // 43 x L, may be empty
    std::vector<std::string> comment_texts;
    std::vector<int> comment_ids;
    Mat<S> comment_feats;  // 43 x L, may be empty

    std::vector<int> target_in_ids;   // SOS + gold prefix (comment vocab)
    std::vector<int> target_out_ext;  // gold + EOS (extended ids)

    std::vector<std::string> ext_tokens;           // OOV copyables
    std::unordered_map<std::string, int> ext_map;  // text -> extended id
    int v_ext = 0;
  };

  void note_copyable(Instance& inst, const std::string& text) const {
    if (comment_vocab_.contains(text)) return;
    if (inst.ext_map.count(text)) return;
    int id = static_cast<int>(comment_vocab_.size()) +
             static_cast<int>(inst.ext_tokens.size());
    inst.ext_map.emplace(text, id);
    inst.ext_tokens.push_back(text);
  }

  int extended_id(const Instance& inst, const std::string& text) const {
    int id = comment_vocab_.id_of(text);
    if (id != Vocabulary::kUnk) return id;
    auto it = inst.ext_map.find(text);
    return it == inst.ext_map.end() ? Vocabulary::kUnk : it->second;
  }

  Instance make_instance(const Example& e, bool with_target) const {
    Instance inst;
    inst.code_texts = code_streams_of(e, cfg_.input_repr);
    for (const std::vector<std::string>& stream : inst.code_texts) {
      if (stream.empty())
        throw Error(ErrorCode::BadRecord, "example has an empty code stream");
      std::vector<int> ids;
      for (const std::string& t : stream) {
        ids.push_back(code_vocab_.id_of(t));
        note_copyable(inst, t);
      }
      inst.code_ids.push_back(std::move(ids));
    }
    if (cfg_.features_active()) {
      FeatureMatrix fm = featurize_code(e.m_edit, e.c_old);
      inst.code_feats.push_back(feature_columns(fm));
    }
    if (cfg_.has_comment_encoder()) {
      inst.comment_texts = e.c_old.texts();
      if (inst.comment_texts.empty())
        throw Error(ErrorCode::BadRecord, "example has an empty old comment");
      for (const std::string& t : inst.comment_texts) {
        inst.comment_ids.push_back(comment_vocab_.id_of(t));
        note_copyable(inst, t);
      }
      if (cfg_.features_active())
        inst.comment_feats = feature_columns(featurize_comment(e.c_old, e.m_edit));
    }
    inst.v_ext = static_cast<int>(comment_vocab_.size()) +
                 static_cast<int>(inst.ext_tokens.size());
    if (with_target)
      attach_target_texts(inst, target_texts_of(e, cfg_.output_repr),
                          /*score_eos=*/true);
    return inst;
  }

  void attach_target_texts(Instance& inst,
                           const std::vector<std::string>& texts,
                           bool score_eos) const {
    if (texts.empty())
      throw Error(ErrorCode::BadRecord, "example has an empty target");
    inst.target_in_ids.clear();
    inst.target_out_ext.clear();
    inst.target_in_ids.push_back(Vocabulary::kSos);
    for (size_t i = 0; i < texts.size(); ++i) {
      inst.target_out_ext.push_back(extended_id(inst, texts[i]));
      if (i + 1 < texts.size() || score_eos)
        inst.target_in_ids.push_back(comment_vocab_.id_of(texts[i]));
    }
    if (score_eos) inst.target_out_ext.push_back(Vocabulary::kEos);
  }

  Mat<S> feature_columns(const FeatureMatrix& fm) const {
    Mat<S> m(FeatureMatrix::kWidth, static_cast<Eigen::Index>(fm.rows.size()));
    std::vector<float> row(FeatureMatrix::kWidth);
    for (size_t i = 0; i < fm.rows.size(); ++i) {
      fm.one_hot_row(i, row.data());
      for (int k = 0; k < FeatureMatrix::kWidth; ++k)
        m(k, static_cast<Eigen::Index>(i)) = static_cast<S>(row[k]);
    }
    return m;
  }

  // ---------------------------------------------------------------------
  // Parameters
  // ---------------------------------------------------------------------

  void validate_config() const {
    if (cfg_.embedding_dim <= 0 || cfg_.encoder_hidden <= 0 ||
        cfg_.decoder_hidden <= 0 || cfg_.encoder_layers <= 0 ||
        cfg_.batch_size <= 0 || cfg_.beam_width <= 0 ||
        cfg_.max_decode_len <= 0 || cfg_.dropout < 0 || cfg_.dropout >= 1 ||
        cfg_.learning_rate <= 0)
      throw Error(ErrorCode::BadConfig, "model dimensions must be positive");
  }

  static double glorot(Eigen::Index rows, Eigen::Index cols) {
    return std::sqrt(6.0 / static_cast<double>(rows + cols));
  }

  Param<S>& tensor(const std::string& name, Eigen::Index rows,
                   Eigen::Index cols, std::mt19937_64& rng,
                   bool zero = false) {
    return store_.get(name, rows, cols, zero ? 0.0 : glorot(rows, cols), rng);
  }

  void create_gru(const std::string& prefix, int in_dim, int hidden,
                  std::mt19937_64& rng) {
    for (const char* gate : {"r", "z", "n"}) {
      tensor(prefix + ".W" + gate, hidden, in_dim, rng);
      tensor(prefix + ".U" + gate, hidden, hidden, rng);
      tensor(prefix + ".b" + gate, hidden, 1, rng, /*zero=*/true);
    }
  }

  std::vector<std::string> encoder_names() const {
    std::vector<std::string> names;
    for (int k = 0; k < cfg_.code_encoder_count(); ++k)
      names.push_back(k == 0 ? "enc.code" : "enc.code2");
    if (cfg_.has_comment_encoder()) names.push_back("enc.comment");
    return names;
  }

  int memory_dim() const { return 2 * cfg_.encoder_hidden; }
  int memory_count() const { return 1 + (cfg_.has_comment_encoder() ? 1 : 0); }

  void create_parameters(std::mt19937_64& rng) {
    const int d = cfg_.embedding_dim;
    tensor("emb.code", d, static_cast<Eigen::Index>(code_vocab_.size()), rng);
    tensor("emb.comment", d,
           static_cast<Eigen::Index>(comment_vocab_.size()), rng);
    if (cfg_.features_active()) {
      tensor("feat.code.W", d, d + FeatureMatrix::kWidth, rng);
      tensor("feat.code.b", d, 1, rng, true);
      if (cfg_.has_comment_encoder()) {
        tensor("feat.comment.W", d, d + FeatureMatrix::kWidth, rng);
        tensor("feat.comment.b", d, 1, rng, true);
      }
    }
    for (const std::string& enc : encoder_names()) {
      for (int layer = 0; layer < cfg_.encoder_layers; ++layer) {
        int in_dim = layer == 0 ? d : memory_dim();
        for (const char* dir : {"fw", "bw"})
          create_gru(enc + ".l" + std::to_string(layer) + "." + dir, in_dim,
                     cfg_.encoder_hidden, rng);
      }
    }
    const int finals =
        memory_dim() * static_cast<int>(encoder_names().size());
    tensor("dec.init.W", cfg_.decoder_hidden, finals, rng);
    tensor("dec.init.b", cfg_.decoder_hidden, 1, rng, true);
    create_gru("dec.gru", d, cfg_.decoder_hidden, rng);
    for (int m = 0; m < memory_count(); ++m)
      tensor("attn." + std::to_string(m) + ".W", memory_dim(),
             cfg_.decoder_hidden, rng);
    const int u_dim = cfg_.decoder_hidden + memory_count() * memory_dim();
    tensor("dec.attnvec.W", cfg_.decoder_hidden, u_dim, rng);
    tensor("dec.attnvec.b", cfg_.decoder_hidden, 1, rng, true);
    if (memory_count() > 1) {
      // Learned split of copy mass between the two source encoders; a fixed
      // split would cap the copy probability of a token present in only one
      // source at that fraction.
      tensor("dec.copysel.W", memory_count(), u_dim, rng);
      tensor("dec.copysel.b", memory_count(), 1, rng, true);
    }
    tensor("dec.out.W", static_cast<Eigen::Index>(comment_vocab_.size()),
           cfg_.decoder_hidden, rng);
    tensor("dec.out.b", static_cast<Eigen::Index>(comment_vocab_.size()), 1,
           rng, true);
    tensor("dec.gate.w", 1, u_dim, rng);
    tensor("dec.gate.b", 1, 1, rng, true);
  }

  // Per-graph cache of parameter leaves (one leaf per tensor per graph).
  struct ParamVars {
    Graph<S>* g = nullptr;
    ParamStore<S>* store = nullptr;
    std::map<std::string, Var<S>> cache;
    Var<S> operator()(const std::string& name) {
      auto it = cache.find(name);
      if (it != cache.end()) return it->second;
      Param<S>* p = store->find(name);
      if (!p)
        throw Error(ErrorCode::BadConfig, "unknown parameter " + name);
      Var<S> v = g->param(*p);
      cache.emplace(name, v);
      return v;
    }
  };

  ParamVars bind_params(Graph<S>& g) {
    ParamVars pv;
    pv.g = &g;
    pv.store = &store_;
    return pv;
  }

  // ---------------------------------------------------------------------
  // Forward pieces
  // ---------------------------------------------------------------------

  struct MemoryView {
    Var<S> H;     // memory_dim x L
    Var<S> pool;  // v_ext x L copy pooling (constant)
  };

  struct Forward {
    std::vector<MemoryView> memories;  // code memory first, then comment
    Var<S> s0;
    int v_ext = 0;
  };

  struct StepOut {
    Var<S> h;
    Var<S> dist;  // v_ext x 1
  };

  static Var<S> embed(Var<S> table, int id) { return cols(table, id, 1); }

  Var<S> embed_comment(ParamVars& pv, int id) const {
    return embed(pv("emb.comment"), id);
  }

  Var<S> gru_cell(ParamVars& pv, const std::string& prefix, Var<S> x,
                  Var<S> h) const {
    Var<S> r = sigmoid(add(add(matmul(pv(prefix + ".Wr"), x),
                               matmul(pv(prefix + ".Ur"), h)),
                           pv(prefix + ".br")));
    Var<S> z = sigmoid(add(add(matmul(pv(prefix + ".Wz"), x),
                               matmul(pv(prefix + ".Uz"), h)),
                           pv(prefix + ".bz")));
    Var<S> n = tanh_op(add(add(matmul(pv(prefix + ".Wn"), x),
                               matmul(pv(prefix + ".Un"), hadamard(r, h))),
                           pv(prefix + ".bn")));
    return add(hadamard(affine(z, S(-1), S(1)), n), hadamard(z, h));
  }

  // Two-layer bidirectional encoding of one stream; returns the per-token
  // memory (top layer) and the concatenated top-layer final states.
  std::pair<Var<S>, Var<S>> encode_stream(Graph<S>& g, ParamVars& pv,
                                          const std::string& enc,
                                          std::vector<Var<S>> inputs,
                                          bool train, std::mt19937_64& rng) {
    const size_t L = inputs.size();
    Var<S> fw_final, bw_final;
    for (int layer = 0; layer < cfg_.encoder_layers; ++layer) {
      std::string lp = enc + ".l" + std::to_string(layer);
      if (train)
        for (Var<S>& x : inputs) x = dropout(x, cfg_.dropout, rng);
      std::vector<Var<S>> fw(L), bw(L);
      Var<S> h = g.constant(Mat<S>::Zero(cfg_.encoder_hidden, 1));
      for (size_t t = 0; t < L; ++t) {
        h = gru_cell(pv, lp + ".fw", inputs[t], h);
        fw[t] = h;
      }
      h = g.constant(Mat<S>::Zero(cfg_.encoder_hidden, 1));
      for (size_t t = L; t-- > 0;) {
        h = gru_cell(pv, lp + ".bw", inputs[t], h);
        bw[t] = h;
      }
      for (size_t t = 0; t < L; ++t) inputs[t] = concat_rows(fw[t], bw[t]);
      fw_final = fw[L - 1];
      bw_final = bw[0];
    }
    return {concat_cols(inputs), concat_rows(fw_final, bw_final)};
  }

  // Builds the copy-pooling constant: pool(ext_id(token at position l), l) = 1.
  Var<S> copy_pool(Graph<S>& g, const Instance& inst,
                   const std::vector<std::string>& texts) const {
    Mat<S> pool = Mat<S>::Zero(inst.v_ext,
                               static_cast<Eigen::Index>(texts.size()));
    for (size_t l = 0; l < texts.size(); ++l) {
      int id = extended_id(inst, texts[l]);
      pool(id, static_cast<Eigen::Index>(l)) = S(1);
    }
    return g.constant(std::move(pool));
  }

  std::vector<Var<S>> embed_stream(Graph<S>& g, ParamVars& pv,
                                   const std::string& table,
                                   const std::vector<int>& ids,
                                   const Mat<S>* feats,
                                   const std::string& feat_prefix) const {
    std::vector<Var<S>> xs;
    Var<S> emb_table = pv(table);
    for (size_t t = 0; t < ids.size(); ++t) {
      Var<S> x = embed(emb_table, ids[t]);
      if (feats != nullptr) {
        Var<S> f = g.constant(Mat<S>(feats->col(static_cast<Eigen::Index>(t))));
        x = add(matmul(pv(feat_prefix + ".W"), concat_rows(x, f)),
                pv(feat_prefix + ".b"));
      }
      xs.push_back(x);
    }
    return xs;
  }

  Forward encode_instance(Graph<S>& g, ParamVars& pv, const Instance& inst,
                          bool train, std::mt19937_64& rng) {
    Forward fwd;
    fwd.v_ext = inst.v_ext;
    std::vector<Var<S>> finals;

    // Code encoders; with two they share the token memory (states
    // concatenated along time) but keep separate final states.
    std::vector<Var<S>> code_mems;
    std::vector<std::string> code_texts_all;
    for (size_t k = 0; k < inst.code_ids.size(); ++k) {
      const Mat<S>* feats =
          (cfg_.features_active() && k < inst.code_feats.size())
              ? &inst.code_feats[k]
              : nullptr;
      std::vector<Var<S>> xs =
          embed_stream(g, pv, "emb.code", inst.code_ids[k], feats,
                       "feat.code");
      auto [mem, fin] = encode_stream(
          g, pv, k == 0 ? "enc.code" : "enc.code2", std::move(xs), train, rng);
      code_mems.push_back(mem);
      finals.push_back(fin);
      code_texts_all.insert(code_texts_all.end(), inst.code_texts[k].begin(),
                            inst.code_texts[k].end());
    }
    Var<S> code_memory =
        code_mems.size() == 1 ? code_mems[0] : concat_cols(code_mems);
    fwd.memories.push_back(
        {code_memory, copy_pool(g, inst, code_texts_all)});

    if (cfg_.has_comment_encoder()) {
      const Mat<S>* feats =
          (cfg_.features_active() && inst.comment_feats.size() > 0)
              ? &inst.comment_feats
              : nullptr;
      std::vector<Var<S>> xs = embed_stream(g, pv, "emb.comment",
                                            inst.comment_ids, feats,
                                            "feat.comment");
      auto [mem, fin] =
          encode_stream(g, pv, "enc.comment", std::move(xs), train, rng);
      fwd.memories.push_back({mem, copy_pool(g, inst, inst.comment_texts)});
      finals.push_back(fin);
    }

    Var<S> all_finals = finals.size() == 1
                            ? finals[0]
                            : [&] {
                                Var<S> acc = finals[0];
                                for (size_t i = 1; i < finals.size(); ++i)
                                  acc = concat_rows(acc, finals[i]);
                                return acc;
                              }();
    fwd.s0 = tanh_op(add(matmul(pv("dec.init.W"), all_finals),
                         pv("dec.init.b")));
    return fwd;
  }

  StepOut decode_step(Graph<S>& g, ParamVars& pv, const Forward& fwd,
                      Var<S> h_prev, Var<S> x, bool train,
                      std::mt19937_64& rng) {
    if (train) x = dropout(x, cfg_.dropout, rng);
    Var<S> h = gru_cell(pv, "dec.gru", x, h_prev);

    std::vector<Var<S>> ctxs;
    std::vector<Var<S>> alphas;
    for (size_t m = 0; m < fwd.memories.size(); ++m) {
      Var<S> scores =
          matmul(transpose(fwd.memories[m].H),
                 matmul(pv("attn." + std::to_string(m) + ".W"), h));
      Var<S> alpha = softmax_col(scores);
      alphas.push_back(alpha);
      ctxs.push_back(matmul(fwd.memories[m].H, alpha));
    }
    Var<S> u = h;
    for (Var<S>& c : ctxs) u = concat_rows(u, c);

    Var<S> a = tanh_op(add(matmul(pv("dec.attnvec.W"), u),
                           pv("dec.attnvec.b")));
    if (train) a = dropout(a, cfg_.dropout, rng);
    Var<S> pgen =
        softmax_col(add(matmul(pv("dec.out.W"), a), pv("dec.out.b")));
    Var<S> gate = sigmoid(add(matmul(pv("dec.gate.w"), u), pv("dec.gate.b")));

    Var<S> copy;
    if (fwd.memories.size() == 1) {
      copy = matmul(fwd.memories[0].pool, alphas[0]);
    } else {
      Var<S> sel = softmax_col(
          add(matmul(pv("dec.copysel.W"), u), pv("dec.copysel.b")));
      for (size_t m = 0; m < fwd.memories.size(); ++m) {
        Var<S> pooled = scale_by(matmul(fwd.memories[m].pool, alphas[m]),
                                 pick(sel, static_cast<Eigen::Index>(m), 0));
        copy = (m == 0) ? pooled : add(copy, pooled);
      }
    }
    Var<S> dist = add(scale_by(pad_rows(pgen, fwd.v_ext), gate),
                      scale_by(copy, affine(gate, S(-1), S(1))));
    return {h, dist};
  }

  int embedding_id_for(int ext_id) const {
    if (ext_id < static_cast<int>(comment_vocab_.size())) return ext_id;
    return Vocabulary::kUnk;  // copied OOV feeds the unknown embedding
  }

  std::string text_for(int ext_id, const Instance& inst, int v) const {
    if (ext_id < v) return comment_vocab_.text_of(ext_id);
    return inst.ext_tokens[static_cast<size_t>(ext_id - v)];
  }

  void parse_candidate(const Example& e, Candidate& c) const {
    if (cfg_.output_repr == OutputRepr::CNew) {
      TokenSeq seq(TokenSource::Comment);
      for (const std::string& t : c.tokens)
        seq.tokens.emplace_back(t, TokenKind::Word);
      c.parsed = std::move(seq);
      c.parse_ok = true;
      return;
    }
    auto [seq, report] = deserialize(c.tokens);
    ApplyOutcome outcome = apply_edits(e.c_old, seq, ApplyMode::Lenient);
    c.parsed = std::move(outcome.result);
    c.parse_ok = report.well_formed && outcome.warnings.empty();
  }

  Var<S> batch_loss(Graph<S>& g, const std::vector<Example>& batch,
                    bool train_mode, std::mt19937_64& rng) {
    if (batch.empty())
      throw Error(ErrorCode::EmptyCorpus, "loss over an empty batch");
    ParamVars pv = bind_params(g);
    Var<S> total = g.scalar(S(0));
    size_t count = 0;
    for (const Example& e : batch) {
      Instance inst = make_instance(e, /*with_target=*/true);
      Forward fwd = encode_instance(g, pv, inst, train_mode, rng);
      Var<S> h = fwd.s0;
      for (size_t t = 0; t < inst.target_in_ids.size(); ++t) {
        Var<S> x = embed_comment(pv, inst.target_in_ids[t]);
        StepOut so = decode_step(g, pv, fwd, h, x, train_mode, rng);
        h = so.h;
        Var<S> p = pick(so.dist, inst.target_out_ext[t], 0);
        total = add(total, affine(log_op(p), S(-1), S(0)));
        ++count;
      }
    }
    return affine(total, S(1.0 / static_cast<double>(count)), S(0));
  }

  size_t target_token_count(const std::vector<Example>& batch) const {
    size_t n = 0;
    for (const Example& e : batch)
      n += target_texts_of(e, cfg_.output_repr).size() + 1;  // + EOS
    return n;
  }

  double batched_loss_value(const std::vector<Example>& set) const {
    double sum = 0.0;
    size_t tokens = 0;
    for (size_t at = 0; at < set.size();
         at += static_cast<size_t>(cfg_.batch_size)) {
      std::vector<Example> batch(
          set.begin() + static_cast<std::ptrdiff_t>(at),
          set.begin() + static_cast<std::ptrdiff_t>(
                            std::min(set.size(),
                                     at + static_cast<size_t>(cfg_.batch_size))));
      size_t t = target_token_count(batch);
      sum += loss_value(batch) * static_cast<double>(t);
      tokens += t;
    }
    return tokens ? sum / static_cast<double>(tokens) : 0.0;
  }

  void snapshot(std::map<std::string, Mat<S>>& into) const {
    into.clear();
    for (const std::string& name : store_.names())
      into[name] = const_cast<ParamStore<S>&>(store_).find(name)->value;
  }

  void restore(const std::map<std::string, Mat<S>>& from) {
    for (const auto& [name, value] : from) store_.find(name)->value = value;
  }

  ModelConfig cfg_;
  Vocabulary code_vocab_, comment_vocab_;
  ParamStore<S> store_;

  template <typename T>
  friend class SequenceModel;
};

// ---------------------------------------------------------------------------
// Checkpoints: magic, config text, both vocabularies, then named tensors
// (name, rows, cols, little-endian 32-bit floats in column-major order).
// ---------------------------------------------------------------------------

namespace model_detail {

inline void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorCode::Io, "truncated checkpoint");
  return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
  uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw Error(ErrorCode::Io, "truncated checkpoint");
  return s;
}

inline void write_vocab(std::ostream& out, const Vocabulary& v) {
  write_u32(out, static_cast<uint32_t>(v.size()));
  for (const std::string& t : v.id_to_text) write_string(out, t);
}

inline Vocabulary read_vocab(std::istream& in) {
  uint32_t n = read_u32(in);
  Vocabulary v;
  for (uint32_t i = 0; i < n; ++i) {
    std::string t = read_string(in);
    if (i < 4) continue;  // specials are fixed
    v.add(t);
  }
  return v;
}

constexpr char kMagic[8] = {'C', 'M', 'T', 'M', 'O', 'D', 'L', '1'};

}  // namespace model_detail

inline void save_model(const std::string& path,
                       const SequenceModel<float>& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  using namespace model_detail;
  out.write(kMagic, sizeof kMagic);
  write_string(out, config_to_text(model.config()));
  write_vocab(out, model.code_vocab());
  write_vocab(out, model.comment_vocab());
  auto& store = const_cast<SequenceModel<float>&>(model).params();
  write_u32(out, static_cast<uint32_t>(store.names().size()));
  for (const std::string& name : store.names()) {
    const Param<float>& p = *store.find(name);
    write_string(out, name);
    write_u32(out, static_cast<uint32_t>(p.value.rows()));
    write_u32(out, static_cast<uint32_t>(p.value.cols()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(sizeof(float) * p.value.size()));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

inline SequenceModel<float> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  using namespace model_detail;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw Error(ErrorCode::Io, path + " is not a model checkpoint");
  ModelConfig cfg = config_from_text(read_string(in));
  Vocabulary code = read_vocab(in);
  Vocabulary comment = read_vocab(in);
  SequenceModel<float> model(cfg, std::move(code), std::move(comment));
  uint32_t tensors = read_u32(in);
  for (uint32_t i = 0; i < tensors; ++i) {
    std::string name = read_string(in);
    uint32_t rows = read_u32(in), cols = read_u32(in);
    Param<float>* p = model.params().find(name);
    if (!p || p->value.rows() != static_cast<Eigen::Index>(rows) ||
        p->value.cols() != static_cast<Eigen::Index>(cols))
      throw Error(ErrorCode::BadConfig,
                  "checkpoint tensor " + name + " does not fit the model");
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(sizeof(float) * p->value.size()));
    if (!in) throw Error(ErrorCode::Io, "truncated checkpoint");
  }
  return model;
}

}  // namespace comet
