// Command-line front end for the cross-lingual pipeline. Every subcommand
// reads the same flat key=value config file, runs one stage, and persists
// its artifacts under out_dir.
//
// Exit codes: 0 success, 2 configuration error, 3 missing artifact,
// 4 data error, 1 internal error.
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "sclom/pipeline.hpp"

namespace {

int exit_code(sclom::ErrKind kind) {
  switch (kind) {
    case sclom::ErrKind::Config:
      return 2;
    case sclom::ErrKind::MissingArtifact:
      return 3;
    case sclom::ErrKind::Data:
      return 4;
    default:
      return 1;
  }
}

int dispatch(const std::string& cmd, const sclom::PipelineConfig& cfg) {
  using namespace sclom;
  if (cmd == "synth") {
    SynthStageResult r = run_synth(cfg);
    std::printf("synth: %d documents, %d lexicon entries -> %s\n", r.n_docs,
                r.lexicon_entries, cfg.out_dir.c_str());
  } else if (cmd == "prepare") {
    Vocabulary v = run_prepare(cfg);
    std::printf("prepare: vocabulary of %d tokens (%d source)\n", v.size(),
                v.src_count());
  } else if (cmd == "embed") {
    EmbedStageResult r = run_embed(cfg);
    std::printf("embed: %d source words x%d, %d target words x%d\n",
                r.src_words, cfg.dim_src, r.tgt_words, cfg.dim_tgt);
  } else if (cmd == "translate") {
    TranslateStageResult r = run_translate(cfg);
    std::printf("translate: fit on %d pairs (%d dropped)\n", r.pairs_used,
                r.pairs_dropped);
  } else if (cmd == "pivots") {
    PivotSelection sel = run_pivots(cfg);
    std::printf("pivots: %zu selected%s\n", sel.pivots.size(),
                sel.incomplete ? " (fewer than requested)" : "");
  } else if (cmd == "induce") {
    Projection proj = run_induce(cfg);
    std::printf("induce: theta %d x %d\n", proj.k(), proj.vocab_dim());
  } else if (cmd == "train") {
    FinalTrainStats stats;
    run_train(cfg, &stats);
    std::printf("train: %d documents used, %d skipped\n", stats.used,
                stats.skipped);
  } else if (cmd == "predict") {
    long n = run_predict(cfg);
    std::printf("predict: %ld documents\n", n);
  } else if (cmd == "eval") {
    EvalReport r = run_eval(cfg);
    std::printf("eval: accuracy %.4f (pos %.4f, neg %.4f) on %ld documents\n",
                r.accuracy, r.acc_pos, r.acc_neg, r.n);
  } else if (cmd == "sweep") {
    auto rows = run_sweep(cfg);
    for (const auto& r : rows)
      std::printf("sweep: %s=%ld accuracy %.4f\n", r.param.c_str(), r.value,
                  r.accuracy);
  } else {
    internal_error("unhandled subcommand " + cmd);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual sentiment pipeline"};
  app.require_subcommand(1);

  std::string config_path = "sclom.conf";
  app.add_option("-c,--config", config_path,
                 "Path to the key=value config file")
      ->capture_default_str();

  static const char* kStages[] = {"synth",  "prepare", "embed",   "translate",
                                  "pivots", "induce",  "train",   "predict",
                                  "eval",   "sweep"};
  static const char* kHelp[] = {
      "Generate the synthetic bilingual corpora and seed lexicon",
      "Build the shared vocabulary over the training corpora",
      "Train the monolingual CBOW embedding tables",
      "Fit the linear translation matrix from the seed lexicon",
      "Select pivot words and their one-to-many translations",
      "Train pivot predictors and factorize them into theta",
      "Train the final classifier in the projected space",
      "Write per-document predictions for the test corpus",
      "Evaluate on the test corpus and write the JSON report",
      "Sweep m or k over a grid and write the accuracy CSV"};
  for (std::size_t i = 0; i < std::size(kStages); ++i)
    app.add_subcommand(kStages[i], kHelp[i]);

  CLI11_PARSE(app, argc, argv);

  try {
    sclom::PipelineConfig cfg = sclom::load_config(config_path);
    return dispatch(app.get_subcommands().front()->get_name(), cfg);
  } catch (const sclom::SclError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
