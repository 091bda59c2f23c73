// Pipeline stages behind the CLI subcommands. Each stage reads its upstream
// artifacts from disk, fails fast when one is missing, and writes its own
// artifacts back, so any prefix of the chain can be rerun in isolation.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sclom/classifier.hpp"
#include "sclom/common.hpp"
#include "sclom/config.hpp"
#include "sclom/corpus.hpp"
#include "sclom/embeddings.hpp"
#include "sclom/pivots.hpp"
#include "sclom/scl.hpp"
#include "sclom/synth.hpp"
#include "sclom/translation.hpp"

namespace sclom {

namespace detail {

inline void require_artifact(const std::string& path,
                             const std::string& producer) {
  if (!std::filesystem::exists(path))
    missing_artifact(path + " (produce it with `" + producer + "`)");
}

// Distinct stage sub-seeds; the synthetic generator occupies offsets 1-4 of
// the same stream.
inline std::uint64_t stage_seed(const PipelineConfig& cfg, int stage) {
  return cfg.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(stage);
}
constexpr int kSeedEmbedSrc = 5;
constexpr int kSeedEmbedTgt = 6;
constexpr int kSeedPivotPredictors = 7;
constexpr int kSeedSvd = 8;
constexpr int kSeedFinal = 9;

inline std::vector<Document> load_corpus(const std::string& path,
                                         const std::string& producer) {
  require_artifact(path, producer);
  return load_jsonl(path);
}

inline std::vector<Document> concat(std::vector<Document> a,
                                    const std::vector<Document>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// synth: generate the corpora, the seed lexicon, and the ground truth
// ---------------------------------------------------------------------------

struct SynthStageResult {
  int n_docs = 0;
  int lexicon_entries = 0;
};

inline SynthStageResult run_synth(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  SynthConfig sc;
  sc.concepts = cfg.synth_concepts;
  sc.frac_two = cfg.synth_frac_two;
  sc.frac_three = cfg.synth_frac_three;
  sc.sentiment_per_polarity = cfg.synth_sent_per_polarity;
  sc.strong_per_polarity = cfg.synth_strong_per_polarity;
  sc.strong_boost = cfg.synth_strong_boost;
  sc.doc_len_min = cfg.synth_len_min;
  sc.doc_len_max = cfg.synth_len_max;
  sc.n_labeled_src = cfg.synth_labeled;
  sc.n_unlabeled_src = cfg.synth_unlabeled_src;
  sc.n_unlabeled_tgt = cfg.synth_unlabeled_tgt;
  sc.n_test_tgt = cfg.synth_test;
  sc.label_balance = cfg.synth_balance;
  sc.noise = cfg.synth_noise;
  sc.p_sent = cfg.synth_p_sent;
  sc.seed = cfg.seed;
  sc.shuffle_mapping = cfg.synth_shuffle;

  auto [bundle, truth] = generate(sc);
  save_jsonl(bundle.labeled_src, p.labeled_src);
  save_jsonl(bundle.unlabeled_src, p.unlabeled_src);
  save_jsonl(bundle.unlabeled_tgt, p.unlabeled_tgt);
  save_jsonl(bundle.test_tgt, p.test_tgt);
  save_ground_truth(p.truth, truth);

  auto pairs = make_seed_lexicon(
      detail::concat(bundle.labeled_src, bundle.unlabeled_src), truth,
      cfg.lexicon_size);
  save_lexicon(p.lexicon, pairs);

  SynthStageResult r;
  r.n_docs = static_cast<int>(bundle.labeled_src.size() +
                              bundle.unlabeled_src.size() +
                              bundle.unlabeled_tgt.size() +
                              bundle.test_tgt.size());
  r.lexicon_entries = static_cast<int>(pairs.size());
  return r;
}

// ---------------------------------------------------------------------------
// prepare: shared vocabulary over the three training corpora
// ---------------------------------------------------------------------------

inline Vocabulary run_prepare(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  auto labeled = detail::load_corpus(p.labeled_src, "sclom synth");
  auto unl_src = detail::load_corpus(p.unlabeled_src, "sclom synth");
  auto unl_tgt = detail::load_corpus(p.unlabeled_tgt, "sclom synth");
  auto all = detail::concat(std::move(labeled), unl_src);
  all = detail::concat(std::move(all), unl_tgt);
  Vocabulary vocab = Vocabulary::build(all, cfg.min_token_freq);
  if (vocab.size() == 0)
    data_error("prepare: vocabulary is empty at min_token_freq " +
               std::to_string(cfg.min_token_freq));
  vocab.save(p.vocab);
  return vocab;
}

// ---------------------------------------------------------------------------
// embed: monolingual CBOW tables, one per language
// ---------------------------------------------------------------------------

struct EmbedStageResult {
  int src_words = 0;
  int tgt_words = 0;
};

inline EmbedStageResult run_embed(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  auto labeled = detail::load_corpus(p.labeled_src, "sclom synth");
  auto unl_src = detail::load_corpus(p.unlabeled_src, "sclom synth");
  auto unl_tgt = detail::load_corpus(p.unlabeled_tgt, "sclom synth");
  auto src_docs = detail::concat(std::move(labeled), unl_src);

  CbowParams cp;
  cp.window = cfg.window;
  cp.negatives = cfg.negatives;
  cp.epochs = cfg.epochs_embed;
  cp.lr = cfg.lr_embed;
  cp.min_count = cfg.min_count_embed;
  cp.threads = 1;  // embeddings stay single-threaded for byte determinism

  cp.dim = cfg.dim_src;
  cp.seed = detail::stage_seed(cfg, detail::kSeedEmbedSrc);
  EmbeddingTable src = train_cbow(src_docs, cp);

  cp.dim = cfg.dim_tgt;
  cp.seed = detail::stage_seed(cfg, detail::kSeedEmbedTgt);
  EmbeddingTable tgt = train_cbow(unl_tgt, cp);

  save_embeddings(src, p.emb_src, /*with_version_tag=*/true);
  save_embeddings(tgt, p.emb_tgt, /*with_version_tag=*/true);
  return {src.size(), tgt.size()};
}

// ---------------------------------------------------------------------------
// translate: least-squares translation matrix from the seed lexicon
// ---------------------------------------------------------------------------

struct TranslateStageResult {
  int pairs_used = 0;
  int pairs_dropped = 0;
};

inline TranslateStageResult run_translate(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.emb_src, "sclom embed");
  detail::require_artifact(p.emb_tgt, "sclom embed");
  detail::require_artifact(p.lexicon, "sclom synth");
  EmbeddingTable src = load_embeddings(p.emb_src, Lang::Src);
  EmbeddingTable tgt = load_embeddings(p.emb_tgt, Lang::Tgt);
  BilingualLexicon lex = load_lexicon(p.lexicon, src, tgt);
  TranslationMatrix tm = fit_translation(lex, src, tgt, cfg.ridge);
  save_translation_matrix(p.tmatrix, tm);
  return {lex.num(), lex.dropped};
}

// ---------------------------------------------------------------------------
// pivots: MI ranking + document-frequency filter + one-to-many translation
// ---------------------------------------------------------------------------

inline PivotSelection run_pivots(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.emb_src, "sclom embed");
  detail::require_artifact(p.emb_tgt, "sclom embed");
  detail::require_artifact(p.tmatrix, "sclom translate");
  auto labeled = detail::load_corpus(p.labeled_src, "sclom synth");
  auto unl_src = detail::load_corpus(p.unlabeled_src, "sclom synth");
  auto unl_tgt = detail::load_corpus(p.unlabeled_tgt, "sclom synth");
  EmbeddingTable src = load_embeddings(p.emb_src, Lang::Src);
  EmbeddingTable tgt = load_embeddings(p.emb_tgt, Lang::Tgt);
  TranslationMatrix tm = load_translation_matrix(p.tmatrix);

  TranslationContext ctx{tm, src, tgt, cfg.p_n, cfg.phi, cfg.one_to_one};
  PivotSelection sel = select_pivots(labeled, unl_src, unl_tgt, cfg.m,
                                     cfg.delta, ctx, cfg.strict_topm);
  if (sel.pivots.empty())
    data_error("pivots: no candidate survived the delta=" +
               std::to_string(cfg.delta) + " document-frequency filter");
  save_pivots(p.pivots, sel.pivots);
  return sel;
}

// ---------------------------------------------------------------------------
// induce: per-pivot linear predictors, stacked and factorized into theta
// ---------------------------------------------------------------------------

inline Projection run_induce(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.vocab, "sclom prepare");
  detail::require_artifact(p.pivots, "sclom pivots");
  auto unl_src = detail::load_corpus(p.unlabeled_src, "sclom synth");
  auto unl_tgt = detail::load_corpus(p.unlabeled_tgt, "sclom synth");
  Vocabulary vocab = Vocabulary::load(p.vocab);
  std::vector<PivotPair> pivots = load_pivots(p.pivots);
  if (cfg.k > static_cast<int>(pivots.size()))
    data_error("induce: k=" + std::to_string(cfg.k) + " exceeds the " +
               std::to_string(pivots.size()) + " available pivots");

  PivotTrainParams tp;
  tp.epochs = cfg.epochs_pivot;
  tp.lr = cfg.lr_pivot;
  tp.reg = cfg.reg_pivot;
  tp.seed = detail::stage_seed(cfg, detail::kSeedPivotPredictors);
  tp.threads = cfg.threads();

  auto unlabeled = detail::concat(std::move(unl_src), unl_tgt);
  std::vector<PivotPredictor> preds =
      train_pivot_predictors(unlabeled, pivots, vocab, tp);
  PredictorMatrix pm = assemble_predictor_matrix(preds);
  Projection proj =
      make_projection(pm, cfg.k, detail::stage_seed(cfg, detail::kSeedSvd));
  save_projection(p.theta, proj);
  return proj;
}

// ---------------------------------------------------------------------------
// train: final hinge classifier in the projected space
// ---------------------------------------------------------------------------

inline FinalModel run_train(const PipelineConfig& cfg,
                            FinalTrainStats* stats_out = nullptr) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.vocab, "sclom prepare");
  detail::require_artifact(p.theta, "sclom induce");
  auto labeled = detail::load_corpus(p.labeled_src, "sclom synth");
  Vocabulary vocab = Vocabulary::load(p.vocab);
  Projection proj = load_projection(p.theta);

  FinalTrainParams fp;
  fp.epochs = cfg.epochs_final;
  fp.lr = cfg.lr_final;
  fp.seed = detail::stage_seed(cfg, detail::kSeedFinal);
  fp.add_bias = cfg.bias;
  FinalModel model = train_final(labeled, vocab, proj, cfg.lambda, fp,
                                 stats_out);
  save_final_model(p.model, model);
  return model;
}

// ---------------------------------------------------------------------------
// predict / eval
// ---------------------------------------------------------------------------

inline long run_predict(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.vocab, "sclom prepare");
  detail::require_artifact(p.theta, "sclom induce");
  detail::require_artifact(p.model, "sclom train");
  auto test = detail::load_corpus(p.test_tgt, "sclom synth");
  Vocabulary vocab = Vocabulary::load(p.vocab);
  Projection proj = load_projection(p.theta);
  FinalModel model = load_final_model(p.model);
  verify_binding(model, proj);

  auto out = open_output(p.predictions);
  out << "id,prediction,score\n";
  for (const auto& d : test) {
    std::optional<BowVector> x = try_vectorize(d, vocab);
    Eigen::VectorXd z = x ? project_doc(proj, *x)
                          : Eigen::VectorXd::Zero(proj.k());
    double score = decision_value(model, z);
    out << d.id << ',' << predict(model, z) << ',' << fmt_double(score)
        << '\n';
  }
  return static_cast<long>(test.size());
}

inline EvalReport run_eval(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.vocab, "sclom prepare");
  detail::require_artifact(p.theta, "sclom induce");
  detail::require_artifact(p.model, "sclom train");
  auto test = detail::load_corpus(p.test_tgt, "sclom synth");
  Vocabulary vocab = Vocabulary::load(p.vocab);
  Projection proj = load_projection(p.theta);
  FinalModel model = load_final_model(p.model);
  verify_binding(model, proj);
  EvalReport r = evaluate_accuracy(model, proj, vocab, test, cfg.threads());
  save_eval_report(p.eval, r);
  return r;
}

// ---------------------------------------------------------------------------
// sweep: accuracy across a grid of m or k values
// ---------------------------------------------------------------------------

struct SweepRow {
  std::string param;
  long value = 0;
  double accuracy = 0.0;
};

namespace detail {

inline double sweep_point(const PipelineConfig& cfg,
                          const std::vector<Document>& labeled,
                          const std::vector<Document>& test,
                          const Vocabulary& vocab, const Projection& proj) {
  FinalTrainParams fp;
  fp.epochs = cfg.epochs_final;
  fp.lr = cfg.lr_final;
  fp.seed = stage_seed(cfg, kSeedFinal);
  fp.add_bias = cfg.bias;
  FinalModel model = train_final(labeled, vocab, proj, cfg.lambda, fp);
  return evaluate_accuracy(model, proj, vocab, test, cfg.threads()).accuracy;
}

inline Projection slice_projection(const Projection& full, int k) {
  Projection out;
  out.theta = full.theta.topRows(k);
  out.sigma = full.sigma.head(k);
  return out;
}

}  // namespace detail

inline std::vector<SweepRow> run_sweep(const PipelineConfig& cfg) {
  validate(cfg);
  ResolvedPaths p = resolve_paths(cfg);
  detail::require_artifact(p.vocab, "sclom prepare");
  detail::require_artifact(p.emb_src, "sclom embed");
  detail::require_artifact(p.emb_tgt, "sclom embed");
  detail::require_artifact(p.tmatrix, "sclom translate");
  auto labeled = detail::load_corpus(p.labeled_src, "sclom synth");
  auto unl_src = detail::load_corpus(p.unlabeled_src, "sclom synth");
  auto unl_tgt = detail::load_corpus(p.unlabeled_tgt, "sclom synth");
  auto test = detail::load_corpus(p.test_tgt, "sclom synth");
  Vocabulary vocab = Vocabulary::load(p.vocab);
  EmbeddingTable src = load_embeddings(p.emb_src, Lang::Src);
  EmbeddingTable tgt = load_embeddings(p.emb_tgt, Lang::Tgt);
  TranslationMatrix tm = load_translation_matrix(p.tmatrix);
  TranslationContext ctx{tm, src, tgt, cfg.p_n, cfg.phi, cfg.one_to_one};

  PivotTrainParams tp;
  tp.epochs = cfg.epochs_pivot;
  tp.lr = cfg.lr_pivot;
  tp.reg = cfg.reg_pivot;
  tp.seed = detail::stage_seed(cfg, detail::kSeedPivotPredictors);
  tp.threads = cfg.threads();
  // The m sweep reselects pivots from the per-language corpora, so they must
  // stay intact; the concatenated training corpus is a copy, not a move.
  auto unlabeled = detail::concat(unl_src, unl_tgt);

  std::vector<SweepRow> rows;
  if (cfg.sweep_param == "k") {
    detail::require_artifact(p.pivots, "sclom pivots");
    std::vector<PivotPair> pivots = load_pivots(p.pivots);
    int kmax = static_cast<int>(cfg.sweep_grid.back());
    if (kmax > static_cast<int>(pivots.size()))
      data_error("sweep: k=" + std::to_string(kmax) + " exceeds the " +
                 std::to_string(pivots.size()) + " available pivots");
    auto preds = train_pivot_predictors(unlabeled, pivots, vocab, tp);
    PredictorMatrix pm = assemble_predictor_matrix(preds);
    // One factorization at the largest k; smaller values take leading rows.
    Projection full = make_projection(
        pm, kmax, detail::stage_seed(cfg, detail::kSeedSvd));
    for (long kv : cfg.sweep_grid) {
      Projection proj = detail::slice_projection(full, static_cast<int>(kv));
      rows.push_back(
          {"k", kv, detail::sweep_point(cfg, labeled, test, vocab, proj)});
    }
  } else {  // m sweep
    int mmax = static_cast<int>(cfg.sweep_grid.back());
    std::vector<PivotPair> pool;
    if (!cfg.strict_topm) {
      // The filter walk collects pivots in MI order, so the selection at a
      // smaller m is a prefix of the selection at the largest m.
      pool = select_pivots(labeled, unl_src, unl_tgt, mmax, cfg.delta, ctx,
                           false)
                 .pivots;
    }
    std::vector<PivotPredictor> pool_preds;
    if (!pool.empty())
      pool_preds = train_pivot_predictors(unlabeled, pool, vocab, tp);
    for (long mv : cfg.sweep_grid) {
      std::vector<PivotPair> pivots;
      std::vector<PivotPredictor> preds;
      if (cfg.strict_topm) {
        pivots = select_pivots(labeled, unl_src, unl_tgt,
                               static_cast<int>(mv), cfg.delta, ctx, true)
                     .pivots;
        if (pivots.empty())
          data_error("sweep: no pivots survive at m=" + std::to_string(mv));
        preds = train_pivot_predictors(unlabeled, pivots, vocab, tp);
      } else {
        std::size_t take =
            std::min<std::size_t>(pool.size(), static_cast<std::size_t>(mv));
        if (take == 0)
          data_error("sweep: no pivots survive at m=" + std::to_string(mv));
        pivots.assign(pool.begin(), pool.begin() + take);
        preds.assign(pool_preds.begin(), pool_preds.begin() + take);
      }
      PredictorMatrix pm = assemble_predictor_matrix(preds);
      int keff = std::min(cfg.k, static_cast<int>(pivots.size()));
      Projection proj = make_projection(
          pm, keff, detail::stage_seed(cfg, detail::kSeedSvd));
      rows.push_back(
          {"m", mv, detail::sweep_point(cfg, labeled, test, vocab, proj)});
    }
  }

  auto out = open_output(p.sweep);
  out << "param,value,accuracy\n";
  for (const auto& r : rows)
    out << r.param << ',' << r.value << ',' << fmt_double(r.accuracy) << '\n';
  return rows;
}

}  // namespace sclom
