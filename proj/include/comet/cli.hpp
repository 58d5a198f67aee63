#pragma once

// Command-line surface. Every subcommand is a thin, deterministic binding of
// library operations to explicit file paths: corpus files in and out are
// line-delimited JSON records, predictions and candidate files are
// tab-separated text, and all randomness flows from --seed / COMET_SEED.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "comet/baselines.hpp"
#include "comet/corpus.hpp"
#include "comet/edit_apply.hpp"
#include "comet/edit_lexicon.hpp"
#include "comet/features.hpp"
#include "comet/gitmine.hpp"
#include "comet/metrics.hpp"
#include "comet/model.hpp"
#include "comet/rerank.hpp"
#include "comet/token.hpp"

namespace comet::cli {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += v[i];
  }
  return out;
}

inline TokenSeq words_of(const std::vector<std::string>& texts) {
  TokenSeq seq(TokenSource::Comment);
  for (const std::string& t : texts) seq.tokens.emplace_back(t, TokenKind::Word);
  return seq;
}

inline std::vector<Example> load_corpus(const std::string& path) {
  return ingest_file(path).examples;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return in;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Prediction {
  std::string id;
  std::vector<std::string> tokens;
};

inline std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<Prediction> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorCode::BadRecord,
                  path + ":" + std::to_string(line_no) +
                      ": expected 'id<TAB>tokens'");
    out.push_back({line.substr(0, tab), split_ws(line.substr(tab + 1))});
  }
  return out;
}

// COMET_SEED wins over flags and config files so whole pipelines can be
// re-seeded without editing scripts.
inline uint64_t effective_seed(uint64_t fallback) {
  const char* env = std::getenv("COMET_SEED");
  if (!env || !*env) return fallback;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadConfig,
                std::string("COMET_SEED is not an integer: ") + env);
  }
}

inline std::map<std::string, const Example*> index_by_id(
    const std::vector<Example>& examples) {
  std::map<std::string, const Example*> by_id;
  for (const Example& e : examples) by_id[e.id] = &e;
  return by_id;
}

inline const Example& example_for(
    const std::map<std::string, const Example*>& by_id,
    const std::string& id) {
  auto it = by_id.find(id);
  if (it == by_id.end())
    throw Error(ErrorCode::BadRecord, "id not present in corpus: " + id);
  return *it->second;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

inline int cmd_ingest(const std::string& records, const std::string& repo,
                      const std::string& project, const std::string& out_path,
                      const std::string& derived) {
  if (records.empty() == repo.empty())
    throw Error(ErrorCode::BadConfig,
                "ingest needs exactly one input: --records or --repo");
  IngestResult result;
  if (!records.empty()) {
    result = ingest_file(records);
  } else {
    if (project.empty())
      throw Error(ErrorCode::BadConfig, "--repo requires --project");
    std::ostringstream lines;
    for (const RawRecord& r : mine_repository(repo, project))
      lines << record_to_json_line(r) << '\n';
    std::istringstream in(lines.str());
    result = ingest_records(in);
  }
  save_corpus(out_path, result.examples);
  if (!derived.empty()) save_derived(derived, result.examples);
  for (const IngestIssue& issue : result.skipped)
    std::cerr << "skipped record at line " << issue.line_no << ": "
              << issue.message << "\n";
  std::cout << "ingested " << result.examples.size() << " examples ("
            << result.skipped.size() << " skipped)\n";
  return 0;
}

inline int cmd_filter(const std::string& in_path, const std::string& out_path,
                      const std::string& rejected_path) {
  std::vector<Example> examples = load_corpus(in_path);
  FilterResult f = filter_examples(examples);
  save_corpus(out_path, f.kept);
  if (!rejected_path.empty()) {
    std::ofstream rej = open_out(rejected_path);
    for (const auto& [example, reason] : f.rejected)
      rej << example.id << '\t' << reject_reason_name(reason) << '\n';
  }
  std::cout << "kept " << f.kept.size() << " of " << examples.size()
            << " examples\n";
  return 0;
}

inline int cmd_partition(const std::string& in_path,
                         const std::string& out_path, double train_w,
                         double valid_w, double test_w, uint64_t seed) {
  std::vector<Example> examples = load_corpus(in_path);
  Partition p =
      partition_examples(examples, train_w, valid_w, test_w,
                         effective_seed(seed));
  save_partition(out_path, p);
  std::cout << "train " << p.train.size() << " valid " << p.valid.size()
            << " test " << p.test.size() << "\n";
  return 0;
}

inline int cmd_stats(const std::string& in_path) {
  std::cout << stats_to_text(corpus_stats(load_corpus(in_path)));
  return 0;
}

inline int cmd_encode_edits(const std::string& in_path,
                            const std::string& out_path,
                            const std::string& side) {
  if (side != "comment" && side != "code")
    throw Error(ErrorCode::BadConfig, "--side must be comment or code");
  std::ofstream out = open_out(out_path);
  for (const Example& e : load_corpus(in_path)) {
    if (side == "comment")
      out << join(e.c_old.texts()) << '\t' << join(serialize(e.c_edit))
          << '\n';
    else
      out << join(e.m_old.texts()) << '\t' << join(serialize(e.m_edit))
          << '\n';
  }
  return 0;
}

inline int cmd_apply_edits(const std::string& in_path,
                           const std::string& out_path, bool lenient) {
  std::ifstream in = open_in(in_path);
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file = open_out(out_path);
    out = &out_file;
  }
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw Error(ErrorCode::BadRecord,
                  in_path + ":" + std::to_string(line_no) +
                      ": expected 'old tokens<TAB>edit tokens'");
    TokenSeq old = words_of(split_ws(line.substr(0, tab)));
    auto [seq, report] = deserialize(split_ws(line.substr(tab + 1)));
    if (!report.well_formed && !lenient)
      throw Error(ErrorCode::MalformedEditSequence,
                  in_path + ":" + std::to_string(line_no) + ": " +
                      report.issue);
    ApplyOutcome applied = apply_edits(
        old, seq, lenient ? ApplyMode::Lenient : ApplyMode::Strict);
    *out << join(applied.result.texts()) << '\n';
  }
  return 0;
}

inline int cmd_featurize(const std::string& in_path,
                         const std::string& out_path,
                         const std::string& side) {
  if (side != "comment" && side != "code")
    throw Error(ErrorCode::BadConfig, "--side must be comment or code");
  std::ofstream out = open_out(out_path);
  for (const Example& e : load_corpus(in_path)) {
    FeatureMatrix fm = side == "code" ? featurize_code(e.m_edit, e.c_old)
                                      : featurize_comment(e.c_old, e.m_edit);
    out << "# " << e.id << '\n' << fm.tsv();
  }
  return 0;
}

inline int cmd_baseline(const std::string& name, const std::string& in_path,
                        const std::string& out_path) {
  std::ofstream out = open_out(out_path);
  for (const Example& e : load_corpus(in_path))
    out << e.id << '\t' << join(run_baseline(name, e).texts()) << '\n';
  return 0;
}

inline int cmd_train(const std::string& config_path,
                     const std::string& train_path,
                     const std::string& valid_path,
                     const std::string& model_out,
                     const std::string& init_embeddings,
                     const std::string& log_path, int min_count) {
  ModelConfig cfg = config_from_text(read_text_file(config_path));
  cfg.seed = effective_seed(cfg.seed);
  std::vector<Example> train = load_corpus(train_path);
  std::vector<Example> valid;
  if (!valid_path.empty()) valid = load_corpus(valid_path);

  SequenceModel<float> model(
      cfg,
      build_code_vocabulary(train, cfg.input_repr,
                            static_cast<size_t>(min_count)),
      build_comment_vocabulary(train, static_cast<size_t>(min_count)));
  if (!init_embeddings.empty()) {
    SequenceModel<float> donor = load_model(init_embeddings);
    model.init_embeddings_from(donor);
  }
  TrainResult result = model.fit(train, valid);
  save_model(model_out, model);
  if (!log_path.empty()) {
    std::ofstream log = open_out(log_path);
    for (const EpochLog& l : result.log)
      log << "epoch " << l.epoch << " train_nll " << l.train_nll
          << " valid_nll " << l.valid_nll << " improved "
          << (l.improved ? 1 : 0) << '\n';
  }
  std::cout << "trained " << result.log.size() << " epochs; best epoch "
            << result.best_epoch << " valid nll " << result.best_valid_nll
            << "; model saved to " << model_out << "\n";
  return 0;
}

inline int cmd_predict(const std::string& model_path,
                       const std::string& in_path,
                       const std::string& out_path, int beam_width,
                       const std::string& candidates_path) {
  SequenceModel<float> model = load_model(model_path);
  if (beam_width <= 0) beam_width = model.config().beam_width;
  std::ofstream out = open_out(out_path);
  std::ofstream cand_file;
  if (!candidates_path.empty()) cand_file = open_out(candidates_path);
  char score_buf[64];
  for (const Example& e : load_corpus(in_path)) {
    std::vector<Candidate> beams = model.beam_search(e, beam_width);
    out << e.id << '\t' << join(beams.front().parsed.texts()) << '\n';
    if (cand_file.is_open()) {
      for (size_t rank = 0; rank < beams.size(); ++rank) {
        std::snprintf(score_buf, sizeof score_buf, "%.17g",
                      beams[rank].beam_score);
        cand_file << e.id << '\t' << rank << '\t' << score_buf << '\t'
                  << join(beams[rank].tokens) << '\n';
      }
    }
  }
  return 0;
}

inline int cmd_rerank(const std::string& mode,
                      const std::string& candidates_path,
                      const std::string& in_path, const std::string& out_path,
                      const std::string& gen_model_path,
                      const std::string& scored_path, double w_beam,
                      double w_gen, double w_sim) {
  if (mode != "edit" && mode != "generation")
    throw Error(ErrorCode::BadConfig, "--mode must be edit or generation");
  if (mode == "edit" && gen_model_path.empty())
    throw Error(ErrorCode::BadConfig,
                "edit-mode reranking needs --gen-model");

  std::vector<Example> corpus = load_corpus(in_path);
  std::map<std::string, const Example*> by_id = index_by_id(corpus);

  // Candidates grouped by example id, in beam-rank order.
  std::vector<std::pair<std::string, std::vector<Candidate>>> grouped;
  {
    std::ifstream in = open_in(candidates_path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string> fields;
      size_t start = 0;
      for (int i = 0; i < 3; ++i) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos)
          throw Error(ErrorCode::BadRecord,
                      candidates_path + ":" + std::to_string(line_no) +
                          ": expected 'id<TAB>rank<TAB>score<TAB>tokens'");
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
      }
      Candidate c;
      c.tokens = split_ws(line.substr(start));
      try {
        c.beam_score = std::stod(fields[2]);
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadRecord,
                    candidates_path + ":" + std::to_string(line_no) +
                        ": bad beam score '" + fields[2] + "'");
      }
      const Example& e = example_for(by_id, fields[0]);
      if (mode == "edit") {
        auto [seq, report] = deserialize(c.tokens);
        ApplyOutcome applied = apply_edits(e.c_old, seq, ApplyMode::Lenient);
        c.parsed = std::move(applied.result);
        c.parse_ok = report.well_formed && applied.warnings.empty();
      } else {
        c.parsed = words_of(c.tokens);
      }
      if (grouped.empty() || grouped.back().first != fields[0])
        grouped.emplace_back(fields[0], std::vector<Candidate>{});
      grouped.back().second.push_back(std::move(c));
    }
  }

  std::ofstream out = open_out(out_path);
  std::ofstream scored;
  if (!scored_path.empty()) scored = open_out(scored_path);

  if (mode == "edit") {
    SequenceModel<float> gen_model = load_model(gen_model_path);
    RerankWeights w{w_beam, w_gen, w_sim};
    for (auto& [id, cands] : grouped) {
      const Example& e = example_for(by_id, id);
      std::vector<Candidate> ranked =
          rerank_edit(std::move(cands), e, gen_model, w);
      out << id << '\t' << join(ranked.front().parsed.texts()) << '\n';
      if (scored.is_open())
        for (size_t i = 0; i < ranked.size(); ++i)
          scored << id << '\t' << i << '\t' << ranked[i].beam_score << '\t'
                 << ranked[i].gen_score << '\t' << ranked[i].similarity
                 << '\t' << ranked[i].combined << '\t'
                 << join(ranked[i].parsed.texts()) << '\n';
    }
  } else {
    RerankWeights w{w_beam, 0.0, w_sim};
    for (auto& [id, cands] : grouped) {
      const Example& e = example_for(by_id, id);
      std::vector<Candidate> ranked =
          rerank_generation(std::move(cands), e.c_old, w);
      out << id << '\t' << join(ranked.front().parsed.texts()) << '\n';
      if (scored.is_open())
        for (size_t i = 0; i < ranked.size(); ++i)
          scored << id << '\t' << i << '\t' << ranked[i].beam_score << '\t'
                 << ranked[i].gen_score << '\t' << ranked[i].similarity
                 << '\t' << ranked[i].combined << '\t'
                 << join(ranked[i].parsed.texts()) << '\n';
    }
  }
  return 0;
}

// Gathers aligned (source, prediction, reference) token triples by id.
struct EvalTriples {
  std::vector<std::vector<std::string>> sources, preds, refs;
};

inline EvalTriples gather_triples(const std::string& pred_path,
                                  const std::string& corpus_path) {
  std::vector<Example> corpus = load_corpus(corpus_path);
  std::map<std::string, const Example*> by_id = index_by_id(corpus);
  EvalTriples t;
  for (const Prediction& p : load_predictions(pred_path)) {
    const Example& e = example_for(by_id, p.id);
    t.sources.push_back(e.c_old.texts());
    t.preds.push_back(p.tokens);
    t.refs.push_back(e.c_new.texts());
  }
  return t;
}

inline const std::vector<std::pair<std::string, std::string>>&
metric_display_names() {
  static const std::vector<std::pair<std::string, std::string>> names = {
      {"xmatch", "xMatch"}, {"bleu4", "BLEU-4"}, {"meteor", "METEOR"},
      {"sari", "SARI"},     {"gleu", "GLEU"},
  };
  return names;
}

inline double metric_value(const CorpusScores& s, const std::string& key) {
  if (key == "xmatch") return s.xmatch_pct;
  if (key == "bleu4") return s.bleu4_pct;
  if (key == "meteor") return s.meteor_pct;
  if (key == "sari") return s.sari_score;
  if (key == "gleu") return s.gleu_pct;
  throw Error(ErrorCode::BadConfig, "unknown metric: " + key);
}

inline std::string display_name(const std::string& key) {
  for (const auto& [k, label] : metric_display_names())
    if (k == key) return label;
  throw Error(ErrorCode::BadConfig, "unknown metric: " + key);
}

inline int cmd_evaluate(const std::string& metrics_csv,
                        const std::string& pred_path,
                        const std::string& corpus_path) {
  std::vector<std::string> keys;
  std::istringstream in(metrics_csv);
  std::string key;
  while (std::getline(in, key, ','))
    if (!key.empty()) keys.push_back(key);
  if (keys.empty())
    throw Error(ErrorCode::BadConfig, "--metrics names no metrics");
  for (const std::string& k : keys) display_name(k);  // validate early

  EvalTriples t = gather_triples(pred_path, corpus_path);
  CorpusScores s = corpus_metrics(t.sources, t.preds, t.refs);
  char buf[64];
  for (const std::string& k : keys) {
    std::snprintf(buf, sizeof buf, "%.3f", metric_value(s, k));
    std::cout << display_name(k) << ' ' << buf << '\n';
  }
  return 0;
}

inline int cmd_report(const std::string& pred_path,
                      const std::string& corpus_path,
                      const std::string& columns_path) {
  EvalTriples t = gather_triples(pred_path, corpus_path);
  CorpusScores s = corpus_metrics(t.sources, t.preds, t.refs);

  std::cout << "== prediction quality (" << s.count << " examples) ==\n";
  char buf[64];
  for (const auto& [key, label] : metric_display_names()) {
    std::snprintf(buf, sizeof buf, "%.3f", metric_value(s, key));
    std::cout << label << '\t' << buf << '\n';
  }
  std::cout << "\n== corpus profile ==\n"
            << stats_to_text(corpus_stats(load_corpus(corpus_path)));

  if (!columns_path.empty()) {
    std::ofstream cols = open_out(columns_path);
    cols << "metric\tvalue\n";
    cols << "count\t" << s.count << '\n';
    for (const auto& [key, label] : metric_display_names()) {
      std::snprintf(buf, sizeof buf, "%.6f", metric_value(s, key));
      cols << key << '\t' << buf << '\n';
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

inline int run(int argc, char** argv) {
  CLI::App app{
      "comment-update toolkit: corpus preparation, edit encoding, baselines, "
      "training, decoding, reranking, and evaluation"};
  app.require_subcommand(1);

  // ingest
  std::string in_records, in_repo, in_project, out_corpus, out_derived;
  CLI::App* ingest =
      app.add_subcommand("ingest", "normalize raw records into a corpus file");
  ingest->add_option("--records", in_records,
                     "line-delimited JSON records to ingest");
  ingest->add_option("--repo", in_repo,
                     "mine a local git repository instead of reading records");
  ingest->add_option("--project", in_project,
                     "project label for mined records");
  ingest->add_option("--out", out_corpus, "corpus file to write")->required();
  ingest->add_option("--derived", out_derived,
                     "optional sidecar with derived edit sequences");

  // filter
  std::string f_in, f_out, f_rejected;
  CLI::App* filter =
      app.add_subcommand("filter", "drop trivial and noisy examples");
  filter->add_option("--in", f_in, "corpus file to read")->required();
  filter->add_option("--out", f_out, "filtered corpus file")->required();
  filter->add_option("--rejected", f_rejected,
                     "optional id<TAB>reason listing of rejected examples");

  // partition
  std::string p_in, p_out;
  double p_train = 0.8, p_valid = 0.1, p_test = 0.1;
  uint64_t p_seed = 13;
  CLI::App* partition = app.add_subcommand(
      "partition", "project-disjoint train/valid/test id lists");
  partition->add_option("--in", p_in, "corpus file to read")->required();
  partition->add_option("--out", p_out, "partition file to write")->required();
  partition->add_option("--train", p_train, "train weight");
  partition->add_option("--valid", p_valid, "valid weight");
  partition->add_option("--test", p_test, "test weight");
  partition->add_option("--seed", p_seed,
                        "shuffle seed (COMET_SEED overrides)");

  // stats
  std::string s_in;
  CLI::App* stats =
      app.add_subcommand("stats", "corpus profile: sizes, overlaps, edits");
  stats->add_option("--in", s_in, "corpus file to read")->required();

  // encode-edits
  std::string ee_in, ee_out, ee_side = "comment";
  CLI::App* encode = app.add_subcommand(
      "encode-edits", "write 'old tokens<TAB>edit tokens' per example");
  encode->add_option("--in", ee_in, "corpus file to read")->required();
  encode->add_option("--out", ee_out, "edit file to write")->required();
  encode->add_option("--side", ee_side, "comment (default) or code");

  // apply-edits
  std::string ae_in, ae_out;
  bool ae_lenient = false;
  CLI::App* apply = app.add_subcommand(
      "apply-edits", "apply 'old tokens<TAB>edit tokens' lines");
  apply->add_option("--in", ae_in, "edit file to read")->required();
  apply->add_option("--out", ae_out, "result file (default: stdout)");
  apply->add_flag("--lenient", ae_lenient,
                  "best-effort application of ill-formed sequences");

  // featurize
  std::string fz_in, fz_out, fz_side = "code";
  CLI::App* featurize = app.add_subcommand(
      "featurize", "per-token linguistic/edit features as TSV");
  featurize->add_option("--in", fz_in, "corpus file to read")->required();
  featurize->add_option("--out", fz_out, "feature file to write")->required();
  featurize->add_option("--side", fz_side, "code (default) or comment");

  // baseline
  std::string b_name, b_in, b_out;
  CLI::App* baseline =
      app.add_subcommand("baseline", "rule-based comment predictions");
  baseline->add_option("--name", b_name, "copy, rts, or rts-null")
      ->required();
  baseline->add_option("--in", b_in, "corpus file to read")->required();
  baseline->add_option("--out", b_out, "prediction file to write")
      ->required();

  // train
  std::string t_config, t_train, t_valid, t_model, t_init, t_log;
  int t_min_count = 2;
  CLI::App* train =
      app.add_subcommand("train", "fit the sequence model on a corpus");
  train->add_option("--config", t_config, "key=value model configuration")
      ->required();
  train->add_option("--train", t_train, "training corpus")->required();
  train->add_option("--valid", t_valid, "validation corpus (early stopping)");
  train->add_option("--model-out", t_model, "checkpoint to write")
      ->required();
  train->add_option("--init-embeddings", t_init,
                    "warm-start embeddings from this checkpoint");
  train->add_option("--log", t_log, "line-delimited epoch log");
  train->add_option("--min-count", t_min_count,
                    "vocabulary frequency threshold");

  // predict
  std::string pr_model, pr_in, pr_out, pr_cands;
  int pr_beam = 0;
  CLI::App* predict =
      app.add_subcommand("predict", "beam-decode comments for a corpus");
  predict->add_option("--model", pr_model, "checkpoint to load")->required();
  predict->add_option("--in", pr_in, "corpus file to read")->required();
  predict->add_option("--out", pr_out, "prediction file to write")
      ->required();
  predict->add_option("--beam-width", pr_beam,
                      "beam width (default: from the checkpoint)");
  predict->add_option("--candidates", pr_cands,
                      "also write every beam candidate with its score");

  // rerank
  std::string rr_mode, rr_cands, rr_in, rr_out, rr_gen, rr_scored;
  double rr_w_beam = -1, rr_w_gen = -1, rr_w_sim = -1;
  CLI::App* rerank = app.add_subcommand(
      "rerank", "re-score beam candidates and keep the best");
  rerank->add_option("--mode", rr_mode, "edit or generation")->required();
  rerank->add_option("--candidates", rr_cands, "candidate file from predict")
      ->required();
  rerank->add_option("--in", rr_in, "corpus file with old comments")
      ->required();
  rerank->add_option("--out", rr_out, "prediction file to write")->required();
  rerank->add_option("--gen-model", rr_gen,
                     "generation-model checkpoint (edit mode)");
  rerank->add_option("--scored", rr_scored,
                     "optional per-candidate component scores");
  rerank->add_option("--w-beam", rr_w_beam, "beam-score weight");
  rerank->add_option("--w-gen", rr_w_gen, "generation-likelihood weight");
  rerank->add_option("--w-sim", rr_w_sim, "similarity weight");

  // evaluate
  std::string ev_metrics = "xmatch,bleu4,meteor,sari,gleu";
  std::string ev_pred, ev_corpus;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score predictions against a corpus");
  evaluate->add_option("--metrics", ev_metrics,
                       "comma list from xmatch,bleu4,meteor,sari,gleu");
  evaluate->add_option("--pred", ev_pred, "prediction file")->required();
  evaluate->add_option("--corpus", ev_corpus,
                       "corpus with references and sources")
      ->required();

  // report
  std::string rp_pred, rp_corpus, rp_columns;
  CLI::App* report = app.add_subcommand(
      "report", "metric table plus corpus profile, optionally columnar");
  report->add_option("--pred", rp_pred, "prediction file")->required();
  report->add_option("--corpus", rp_corpus, "corpus file")->required();
  report->add_option("--columns", rp_columns,
                     "plot-ready metric<TAB>value file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::BadConfig, e.what());
  }

  if (*ingest)
    return cmd_ingest(in_records, in_repo, in_project, out_corpus,
                      out_derived);
  if (*filter) return cmd_filter(f_in, f_out, f_rejected);
  if (*partition)
    return cmd_partition(p_in, p_out, p_train, p_valid, p_test, p_seed);
  if (*stats) return cmd_stats(s_in);
  if (*encode) return cmd_encode_edits(ee_in, ee_out, ee_side);
  if (*apply) return cmd_apply_edits(ae_in, ae_out, ae_lenient);
  if (*featurize) return cmd_featurize(fz_in, fz_out, fz_side);
  if (*baseline) return cmd_baseline(b_name, b_in, b_out);
  if (*train)
    return cmd_train(t_config, t_train, t_valid, t_model, t_init, t_log,
                     t_min_count);
  if (*predict) return cmd_predict(pr_model, pr_in, pr_out, pr_beam, pr_cands);
  if (*rerank) {
    RerankWeights defaults =
        rr_mode == "generation" ? generation_rerank_weights() : RerankWeights{};
    return cmd_rerank(rr_mode, rr_cands, rr_in, rr_out, rr_gen, rr_scored,
                      rr_w_beam < 0 ? defaults.beam : rr_w_beam,
                      rr_w_gen < 0 ? defaults.generation : rr_w_gen,
                      rr_w_sim < 0 ? defaults.similarity : rr_w_sim);
  }
  if (*evaluate) return cmd_evaluate(ev_metrics, ev_pred, ev_corpus);
  if (*report) return cmd_report(rp_pred, rp_corpus, rp_columns);
  throw Error(ErrorCode::BadConfig, "no subcommand selected");
}

}  // namespace comet::cli
