// Flat key=value pipeline configuration: one file drives every subcommand.
// Unknown or duplicate keys are configuration errors, so typos fail fast.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sclom/common.hpp"

namespace sclom {

struct PipelineConfig {
  // input/output paths; empty corpus paths resolve to files under out_dir
  std::string labeled_src;
  std::string unlabeled_src;
  std::string unlabeled_tgt;
  std::string test_tgt;
  std::string lexicon;
  std::string out_dir = "out";

  // pivot machinery
  int m = 300;              // number of pivots
  int k = 120;              // projected dimensionality
  long delta = 30;          // document-frequency floor for pivots
  double phi = 0.1;         // translation-score gap threshold
  int p_n = 3;              // candidate translations per pivot (fixed)
  long min_token_freq = 5;  // vocabulary keeps tokens with freq > this

  // embeddings
  int dim_src = 200;
  int dim_tgt = 50;
  int window = 5;
  int negatives = 5;
  int epochs_embed = 5;
  double lr_embed = 0.025;
  long min_count_embed = 5;

  // translation matrix
  double ridge = 1e-6;

  // pivot predictors
  int epochs_pivot = 20;
  double lr_pivot = 1e-3;
  double reg_pivot = 1e-5;

  // final classifier
  double lambda = 1e-3;
  int epochs_final = 200;
  double lr_final = 0.5;
  bool bias = false;

  // global behavior
  std::uint64_t seed = 42;
  bool strict_topm = false;
  bool parallel = false;    // multi-thread the per-pivot and eval loops
  bool one_to_one = false;  // reference mode: top-1 translations only

  // sweep
  std::string sweep_param = "k";
  std::vector<long> sweep_grid = {50, 100, 150, 200, 250, 300};

  // synthetic world (cmd_synth)
  int synth_concepts = 2000;
  double synth_frac_two = 0.30;
  double synth_frac_three = 0.10;
  int synth_sent_per_polarity = 40;
  int synth_strong_per_polarity = 5;
  double synth_strong_boost = 3.0;
  int synth_len_min = 20;
  int synth_len_max = 60;
  int synth_labeled = 2000;
  int synth_unlabeled_src = 5000;
  int synth_unlabeled_tgt = 5000;
  int synth_test = 1000;
  double synth_balance = 0.5;
  double synth_noise = 0.05;
  double synth_p_sent = 0.3;
  bool synth_shuffle = false;
  int lexicon_size = 200;  // seed dictionary entries emitted by cmd_synth

  int threads() const { return parallel ? 4 : 1; }
};

inline void validate(const PipelineConfig& c) {
  if (c.m < 1) config_error("config: m must be >= 1");
  if (c.k < 1 || c.k > c.m) config_error("config: k must satisfy 1 <= k <= m");
  if (c.delta < 0) config_error("config: delta must be >= 0");
  if (!(c.phi > 0.0)) config_error("config: phi must be > 0");
  if (c.p_n != 3) config_error("config: p_n must be 3");
  if (c.min_token_freq < 0) config_error("config: min_token_freq must be >= 0");
  if (c.dim_src < 2 || c.dim_tgt < 2)
    config_error("config: embedding dims must be >= 2");
  if (c.window < 1) config_error("config: window must be >= 1");
  if (c.negatives < 1) config_error("config: negatives must be >= 1");
  if (c.epochs_embed < 0) config_error("config: epochs_embed must be >= 0");
  if (!(c.lr_embed > 0.0)) config_error("config: lr_embed must be > 0");
  if (c.min_count_embed < 0)
    config_error("config: min_count_embed must be >= 0");
  if (c.ridge < 0.0) config_error("config: ridge must be >= 0");
  if (c.epochs_pivot < 1) config_error("config: epochs_pivot must be >= 1");
  if (!(c.lr_pivot > 0.0)) config_error("config: lr_pivot must be > 0");
  if (c.reg_pivot < 0.0) config_error("config: reg_pivot must be >= 0");
  if (!(c.lambda > 0.0)) config_error("config: lambda must be > 0");
  if (c.epochs_final < 1) config_error("config: epochs_final must be >= 1");
  if (!(c.lr_final > 0.0)) config_error("config: lr_final must be > 0");
  if (c.out_dir.empty()) config_error("config: out_dir must not be empty");
  if (c.sweep_param != "k" && c.sweep_param != "m")
    config_error("config: sweep_param must be `k` or `m`");
  if (c.sweep_grid.empty()) config_error("config: sweep_grid must not be empty");
  long prev = 0;
  for (long v : c.sweep_grid) {
    if (v < 1) config_error("config: sweep_grid values must be >= 1");
    if (v <= prev)
      config_error("config: sweep_grid must be strictly increasing");
    prev = v;
  }
  if (c.lexicon_size < 1) config_error("config: lexicon_size must be >= 1");
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  config_error("config: " + key + " must be true/false, got '" + v + "'");
  return false;  // unreachable
}

inline std::vector<long> parse_grid(const std::string& key,
                                    const std::string& v) {
  std::vector<long> grid;
  for (const auto& cell : split_char(v, ',')) {
    std::string t = trim(cell);
    if (t.empty())
      config_error("config: " + key + " has an empty list entry");
    grid.push_back(parse_long(t));
  }
  return grid;
}

}  // namespace detail

// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
inline PipelineConfig load_config(const std::string& path) {
  auto in = open_input(path);
  PipelineConfig cfg;
  std::vector<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      config_error("config " + path + " line " + std::to_string(lineno) +
                   ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty())
      config_error("config " + path + " line " + std::to_string(lineno) +
                   ": empty key");
    for (const auto& s : seen)
      if (s == key)
        config_error("config " + path + ": duplicate key '" + key + "'");
    seen.push_back(key);

    try {
      if (key == "labeled_src") cfg.labeled_src = val;
      else if (key == "unlabeled_src") cfg.unlabeled_src = val;
      else if (key == "unlabeled_tgt") cfg.unlabeled_tgt = val;
      else if (key == "test_tgt") cfg.test_tgt = val;
      else if (key == "lexicon") cfg.lexicon = val;
      else if (key == "out_dir") cfg.out_dir = val;
      else if (key == "m") cfg.m = static_cast<int>(parse_long(val));
      else if (key == "k") cfg.k = static_cast<int>(parse_long(val));
      else if (key == "delta") cfg.delta = parse_long(val);
      else if (key == "phi") cfg.phi = parse_double(val);
      else if (key == "p_n") cfg.p_n = static_cast<int>(parse_long(val));
      else if (key == "min_token_freq") cfg.min_token_freq = parse_long(val);
      else if (key == "dim_src") cfg.dim_src = static_cast<int>(parse_long(val));
      else if (key == "dim_tgt") cfg.dim_tgt = static_cast<int>(parse_long(val));
      else if (key == "window") cfg.window = static_cast<int>(parse_long(val));
      else if (key == "negatives")
        cfg.negatives = static_cast<int>(parse_long(val));
      else if (key == "epochs_embed")
        cfg.epochs_embed = static_cast<int>(parse_long(val));
      else if (key == "lr_embed") cfg.lr_embed = parse_double(val);
      else if (key == "min_count_embed") cfg.min_count_embed = parse_long(val);
      else if (key == "ridge") cfg.ridge = parse_double(val);
      else if (key == "epochs_pivot")
        cfg.epochs_pivot = static_cast<int>(parse_long(val));
      else if (key == "lr_pivot") cfg.lr_pivot = parse_double(val);
      else if (key == "reg_pivot") cfg.reg_pivot = parse_double(val);
      else if (key == "lambda") cfg.lambda = parse_double(val);
      else if (key == "epochs_final")
        cfg.epochs_final = static_cast<int>(parse_long(val));
      else if (key == "lr_final") cfg.lr_final = parse_double(val);
      else if (key == "bias") cfg.bias = detail::parse_bool(key, val);
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_long(val));
      else if (key == "strict_topm")
        cfg.strict_topm = detail::parse_bool(key, val);
      else if (key == "parallel") cfg.parallel = detail::parse_bool(key, val);
      else if (key == "one_to_one")
        cfg.one_to_one = detail::parse_bool(key, val);
      else if (key == "sweep_param") cfg.sweep_param = val;
      else if (key == "sweep_grid") cfg.sweep_grid = detail::parse_grid(key, val);
      else if (key == "synth_concepts")
        cfg.synth_concepts = static_cast<int>(parse_long(val));
      else if (key == "synth_frac_two") cfg.synth_frac_two = parse_double(val);
      else if (key == "synth_frac_three")
        cfg.synth_frac_three = parse_double(val);
      else if (key == "synth_sent_per_polarity")
        cfg.synth_sent_per_polarity = static_cast<int>(parse_long(val));
      else if (key == "synth_strong_per_polarity")
        cfg.synth_strong_per_polarity = static_cast<int>(parse_long(val));
      else if (key == "synth_strong_boost")
        cfg.synth_strong_boost = parse_double(val);
      else if (key == "synth_len_min")
        cfg.synth_len_min = static_cast<int>(parse_long(val));
      else if (key == "synth_len_max")
        cfg.synth_len_max = static_cast<int>(parse_long(val));
      else if (key == "synth_labeled")
        cfg.synth_labeled = static_cast<int>(parse_long(val));
      else if (key == "synth_unlabeled_src")
        cfg.synth_unlabeled_src = static_cast<int>(parse_long(val));
      else if (key == "synth_unlabeled_tgt")
        cfg.synth_unlabeled_tgt = static_cast<int>(parse_long(val));
      else if (key == "synth_test")
        cfg.synth_test = static_cast<int>(parse_long(val));
      else if (key == "synth_balance") cfg.synth_balance = parse_double(val);
      else if (key == "synth_noise") cfg.synth_noise = parse_double(val);
      else if (key == "synth_p_sent") cfg.synth_p_sent = parse_double(val);
      else if (key == "synth_shuffle")
        cfg.synth_shuffle = detail::parse_bool(key, val);
      else if (key == "lexicon_size")
        cfg.lexicon_size = static_cast<int>(parse_long(val));
      else
        config_error("config " + path + ": unknown key '" + key + "'");
    } catch (const SclError& e) {
      if (e.kind() == ErrKind::Config) throw;
      config_error("config " + path + " line " + std::to_string(lineno) +
                   ": bad value for '" + key + "': " + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

// Effective corpus/lexicon paths: explicit settings win, otherwise the
// conventional file names under out_dir.
struct ResolvedPaths {
  std::string labeled_src, unlabeled_src, unlabeled_tgt, test_tgt, lexicon;
  std::string truth, vocab, emb_src, emb_tgt, tmatrix, pivots, theta, model;
  std::string predictions, eval, sweep;
};

inline ResolvedPaths resolve_paths(const PipelineConfig& c) {
  auto pick = [&](const std::string& given, const char* name) {
    return given.empty() ? c.out_dir + "/" + name : given;
  };
  ResolvedPaths p;
  p.labeled_src = pick(c.labeled_src, "labeled_src.jsonl");
  p.unlabeled_src = pick(c.unlabeled_src, "unlabeled_src.jsonl");
  p.unlabeled_tgt = pick(c.unlabeled_tgt, "unlabeled_tgt.jsonl");
  p.test_tgt = pick(c.test_tgt, "test_tgt.jsonl");
  p.lexicon = pick(c.lexicon, "lexicon.tsv");
  p.truth = c.out_dir + "/truth.json";
  p.vocab = c.out_dir + "/vocab.tsv";
  p.emb_src = c.out_dir + "/emb_src.txt";
  p.emb_tgt = c.out_dir + "/emb_tgt.txt";
  p.tmatrix = c.out_dir + "/tmatrix.txt";
  p.pivots = c.out_dir + "/pivots.tsv";
  p.theta = c.out_dir + "/theta.txt";
  p.model = c.out_dir + "/model.txt";
  p.predictions = c.out_dir + "/predictions.csv";
  p.eval = c.out_dir + "/eval.json";
  p.sweep = c.out_dir + "/sweep.csv";
  return p;
}

}  // namespace sclom
