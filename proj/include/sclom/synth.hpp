// Synthetic bilingual worlds with planted ground truth: a ring of shared
// concepts surfaces as disjoint source/target vocabularies, a two-tier
// sentiment lexicon drives the labels, and synonym groups of size 1-3 give
// the target language its one-to-many structure. Includes the evaluation
// metrics and the no-transfer reference system.
//
// Generation model, per document:
//   label y ~ Bernoulli(label_balance), length L ~ U[len_min, len_max],
//   ring center c ~ U[0, concepts). Each of the L tokens independently:
//     with prob p_sent  -> sentiment draw: polarity = y, flipped with prob
//                          `noise`; word w drawn from that polarity's lexicon
//                          with weight base^(ring_dist(w, c) / stride(w)),
//                          truncated at 4 strides. stride(w) = concepts /
//                          words_per_polarity for regular words; strong-tier
//                          words use strong_boost times that, so they reach
//                          strong_boost times as many documents and carry the
//                          strongest label signal by construction;
//     otherwise         -> topic draw: concept = c + offset, offset in
//                          {0: 0.4, +-1: 0.2 each, +-2: 0.1 each}.
//   Source docs surface concept i as "sw<i>"; target docs pick uniformly
//   from i's synonym set {"tw<i>_0", ...}. The ring locality gives every
//   concept a context signature that survives a linear map between the two
//   embedding spaces, and true synonyms (identical distributions) arrive as
//   near-ties at translation time. With shuffle_mapping the target surfaces
//   a permuted concept; the permutation never sends a sentiment concept to
//   another sentiment concept, so destroying the mapping destroys every
//   cross-lingual sentiment cue.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sclom/classifier.hpp"
#include "sclom/common.hpp"
#include "sclom/corpus.hpp"
#include "sclom/loss.hpp"
#include "sclom/scl.hpp"
#include "sclom/sgd.hpp"
#include "sclom/translation.hpp"

namespace sclom {

struct SynthConfig {
  int concepts = 2000;           // shared latent vocabulary, one ring
  double frac_two = 0.30;        // fraction of concepts with 2 target synonyms
  double frac_three = 0.10;      // fraction with 3
  int sentiment_per_polarity = 40;
  int strong_per_polarity = 5;   // wide-reach tier within each polarity
  double strong_boost = 3.0;     // kernel-width multiplier for that tier
  int doc_len_min = 20;
  int doc_len_max = 60;
  int n_labeled_src = 2000;
  int n_unlabeled_src = 5000;
  int n_unlabeled_tgt = 5000;
  int n_test_tgt = 1000;
  double label_balance = 0.5;    // probability of label +1
  double noise = 0.05;           // sentiment word contradicts the label
  double p_sent = 0.3;           // sentiment-channel rate per token
  std::uint64_t seed = 42;
  bool shuffle_mapping = false;  // target side surfaces permuted concepts
};

struct GroundTruth {
  std::map<std::string, std::vector<std::string>> mapping;  // sw -> tw set
  std::map<std::string, int> lexicon;                       // sw -> polarity
  std::vector<std::string> strong;                          // strong-tier sw
};

struct SynthBundle {
  std::vector<Document> labeled_src;
  std::vector<Document> unlabeled_src;
  std::vector<Document> unlabeled_tgt;
  std::vector<Document> test_tgt;
};

// Sentiment-kernel constants (part of the generation contract).
inline constexpr double kSentKernelBase = 0.5;   // decay per polarity stride
inline constexpr double kSentKernelRadius = 4.0; // cutoff, in strides

inline void validate(const SynthConfig& c) {
  if (c.concepts < 1) config_error("synth: concepts must be positive");
  if (c.sentiment_per_polarity < 1)
    config_error("synth: sentiment_per_polarity must be positive");
  if (2 * c.sentiment_per_polarity > c.concepts)
    config_error("synth: infeasible config, sentiment lexicon (" +
                 std::to_string(2 * c.sentiment_per_polarity) +
                 " words) exceeds the concept vocabulary (" +
                 std::to_string(c.concepts) + ")");
  if (c.strong_per_polarity < 0 ||
      c.strong_per_polarity > c.sentiment_per_polarity)
    config_error("synth: strong_per_polarity must be in [0, per-polarity size]");
  if (c.strong_boost < 1.0)
    config_error("synth: strong_boost must be >= 1");
  if (c.frac_two < 0 || c.frac_three < 0 || c.frac_two + c.frac_three > 1.0)
    config_error("synth: synonym fractions must be non-negative and sum <= 1");
  if (c.doc_len_min < 1 || c.doc_len_max < c.doc_len_min)
    config_error("synth: document length range is invalid");
  if (c.n_labeled_src < 1 || c.n_unlabeled_src < 1 || c.n_unlabeled_tgt < 1 ||
      c.n_test_tgt < 1)
    config_error("synth: corpus sizes must be positive");
  if (!(c.label_balance > 0.0) || !(c.label_balance < 1.0))
    config_error("synth: label_balance must lie in (0, 1)");
  if (c.noise < 0.0 || c.noise >= 0.5)
    config_error("synth: noise must lie in [0, 0.5)");
  if (!(c.p_sent > 0.0) || !(c.p_sent < 1.0))
    config_error("synth: p_sent must lie in (0, 1)");
  if (c.shuffle_mapping && 6 * c.sentiment_per_polarity > c.concepts)
    config_error(
        "synth: shuffle_mapping needs concepts >= 3x the lexicon size "
        "to keep sentiment concepts off each other");
}

namespace detail {

// Deterministic layout derived from the config: lexicon slots, polarities,
// kernel widths, synonym group sizes, and the optional surface permutation.
struct SynthWorld {
  SynthConfig cfg;
  int n_sent = 0;
  std::vector<int> sent_slot;          // lexicon index -> concept id
  std::vector<double> sent_stride;     // lexicon index -> kernel stride
  std::vector<char> sent_strong;       // lexicon index -> strong tier
  std::vector<int> pos_words, neg_words;  // lexicon indices per polarity
  std::vector<int> lex_of_concept;     // concept -> lexicon index or -1
  std::vector<int> group_size;         // concept -> 1..3
  std::vector<int> surface_perm;       // concept used for target surfacing

  double stride_pol() const {
    return static_cast<double>(cfg.concepts) / cfg.sentiment_per_polarity;
  }
};

inline SynthWorld build_world(const SynthConfig& cfg) {
  validate(cfg);
  SynthWorld w;
  w.cfg = cfg;
  const int v = cfg.concepts;
  const int per = cfg.sentiment_per_polarity;
  w.n_sent = 2 * per;
  w.sent_slot.resize(w.n_sent);
  w.sent_stride.assign(w.n_sent, w.stride_pol());
  w.sent_strong.assign(w.n_sent, 0);
  w.lex_of_concept.assign(v, -1);
  // evenly spaced slots, alternating polarity so neither polarity clusters
  for (int j = 0; j < w.n_sent; ++j) {
    int slot = static_cast<int>((static_cast<long>(j) * v) / w.n_sent);
    w.sent_slot[j] = slot;
    w.lex_of_concept[slot] = j;
    (j % 2 == 0 ? w.pos_words : w.neg_words).push_back(j);
  }
  // strong tier spread evenly within each polarity
  for (int t = 0; t < cfg.strong_per_polarity; ++t) {
    int at = static_cast<int>((static_cast<long>(t) * per) /
                              std::max(1, cfg.strong_per_polarity));
    for (const auto* list : {&w.pos_words, &w.neg_words}) {
      int j = (*list)[at];
      w.sent_strong[j] = 1;
      w.sent_stride[j] = cfg.strong_boost * w.stride_pol();
    }
  }
  // synonym group sizes by seeded shuffle
  long n3 = std::lround(cfg.frac_three * v);
  long n2 = std::lround(cfg.frac_two * v);
  if (n2 + n3 > v) n2 = v - n3;
  std::vector<int> ids(v);
  for (int i = 0; i < v; ++i) ids[i] = i;
  Rng grng(cfg.seed ^ 0x8f1bbcdc5a5a5a5aULL);
  grng.shuffle(ids);
  w.group_size.assign(v, 1);
  for (long i = 0; i < n3; ++i) w.group_size[ids[i]] = 3;
  for (long i = n3; i < n3 + n2; ++i) w.group_size[ids[i]] = 2;
  // optional decoupling of the two surface languages
  w.surface_perm.resize(v);
  for (int i = 0; i < v; ++i) w.surface_perm[i] = i;
  if (cfg.shuffle_mapping) {
    Rng prng(cfg.seed ^ 0x3c6ef372fe94f82bULL);
    prng.shuffle(w.surface_perm);
    // Repair pass: a sentiment concept must never surface as another
    // sentiment concept, or residual label signal leaks through the
    // scrambled mapping. Swap each offender with a fully neutral position.
    std::vector<int> spare;
    for (int i = 0; i < v; ++i)
      if (w.lex_of_concept[i] < 0 && w.lex_of_concept[w.surface_perm[i]] < 0)
        spare.push_back(i);
    std::size_t next = 0;
    for (int j = 0; j < w.n_sent; ++j) {
      int s = w.sent_slot[j];
      if (w.lex_of_concept[w.surface_perm[s]] < 0) continue;
      if (next >= spare.size())
        internal_error("synth: ran out of neutral slots repairing the shuffle");
      std::swap(w.surface_perm[s], w.surface_perm[spare[next++]]);
    }
  }
  return w;
}

inline int ring_distance(int a, int b, int v) {
  int d = std::abs(a - b);
  return std::min(d, v - d);
}

inline double sent_kernel(const SynthWorld& w, int word, int center) {
  double stride = w.sent_stride[word];
  double r = ring_distance(w.sent_slot[word], center, w.cfg.concepts);
  if (r > kSentKernelRadius * stride) return 0.0;
  return std::pow(kSentKernelBase, r / stride);
}

// One concept draw. Kept in one place so source and target documents share
// the exact sampling path.
inline int draw_concept(const SynthWorld& w, Rng& rng, int label, int center) {
  const SynthConfig& cfg = w.cfg;
  if (rng.uniform() < cfg.p_sent) {
    int pol = label;
    if (rng.uniform() < cfg.noise) pol = -pol;
    const auto& words = pol > 0 ? w.pos_words : w.neg_words;
    double total = 0.0;
    for (int j : words) total += sent_kernel(w, j, center);
    double u = rng.uniform() * total;
    double acc = 0.0;
    int chosen = words.back();
    for (int j : words) {
      acc += sent_kernel(w, j, center);
      if (u < acc) {
        chosen = j;
        break;
      }
    }
    return w.sent_slot[chosen];
  }
  double u = rng.uniform();
  int offset;
  if (u < 0.4)
    offset = 0;
  else if (u < 0.6)
    offset = 1;
  else if (u < 0.8)
    offset = -1;
  else if (u < 0.9)
    offset = 2;
  else
    offset = -2;
  int v = cfg.concepts;
  return ((center + offset) % v + v) % v;
}

inline std::string source_surface(int concept_id) {
  return "sw" + std::to_string(concept_id);
}

inline std::string target_surface(int concept_id, int synonym) {
  return "tw" + std::to_string(concept_id) + "_" + std::to_string(synonym);
}

inline std::vector<Document> make_corpus(const SynthWorld& w, Lang lang,
                                         int count, bool keep_labels,
                                         const std::string& id_prefix,
                                         std::uint64_t seed) {
  Rng rng(seed);
  const SynthConfig& cfg = w.cfg;
  std::vector<Document> docs;
  docs.reserve(count);
  for (int d = 0; d < count; ++d) {
    int label = rng.uniform() < cfg.label_balance ? 1 : -1;
    int len = cfg.doc_len_min +
              static_cast<int>(rng.below(cfg.doc_len_max - cfg.doc_len_min + 1));
    int center = static_cast<int>(rng.below(cfg.concepts));
    Document doc;
    doc.id = id_prefix + std::to_string(d);
    doc.lang = lang;
    if (keep_labels) doc.label = label;
    doc.tokens.reserve(len);
    for (int t = 0; t < len; ++t) {
      int concept_id = draw_concept(w, rng, label, center);
      if (lang == Lang::Src) {
        doc.tokens.push_back(source_surface(concept_id));
      } else {
        int surf = w.surface_perm[concept_id];
        int synonym = static_cast<int>(rng.below(w.group_size[surf]));
        doc.tokens.push_back(target_surface(surf, synonym));
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace detail

inline std::pair<SynthBundle, GroundTruth> generate(const SynthConfig& cfg) {
  detail::SynthWorld w = detail::build_world(cfg);
  SynthBundle bundle;
  const std::uint64_t s = cfg.seed;
  bundle.labeled_src = detail::make_corpus(w, Lang::Src, cfg.n_labeled_src,
                                           true, "s-lab-",
                                           s * 0x9e3779b97f4a7c15ULL + 1);
  bundle.unlabeled_src = detail::make_corpus(w, Lang::Src, cfg.n_unlabeled_src,
                                             false, "s-unl-",
                                             s * 0x9e3779b97f4a7c15ULL + 2);
  bundle.unlabeled_tgt = detail::make_corpus(w, Lang::Tgt, cfg.n_unlabeled_tgt,
                                             false, "t-unl-",
                                             s * 0x9e3779b97f4a7c15ULL + 3);
  bundle.test_tgt = detail::make_corpus(w, Lang::Tgt, cfg.n_test_tgt, true,
                                        "t-tst-",
                                        s * 0x9e3779b97f4a7c15ULL + 4);
  GroundTruth truth;
  for (int i = 0; i < cfg.concepts; ++i) {
    std::vector<std::string> tws;
    for (int j = 0; j < w.group_size[i]; ++j)
      tws.push_back(detail::target_surface(i, j));
    truth.mapping[detail::source_surface(i)] = std::move(tws);
  }
  for (int j = 0; j < w.n_sent; ++j) {
    std::string sw = detail::source_surface(w.sent_slot[j]);
    truth.lexicon[sw] = (j % 2 == 0) ? 1 : -1;
    if (w.sent_strong[j]) truth.strong.push_back(sw);
  }
  return {std::move(bundle), std::move(truth)};
}

// Seed dictionary analogue: the top_n most frequent source words (counted
// over the given source documents, ties broken by token) paired with their
// first target synonym.
inline std::vector<std::pair<std::string, std::string>> make_seed_lexicon(
    const std::vector<Document>& source_docs, const GroundTruth& truth,
    int top_n) {
  if (top_n < 1) config_error("make_seed_lexicon: top_n must be positive");
  std::unordered_map<std::string, long> freq;
  for (const auto& d : source_docs)
    for (const auto& t : d.tokens) ++freq[t];
  std::vector<std::pair<std::string, long>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [tok, n] : items) {
    if (static_cast<int>(out.size()) == top_n) break;
    auto it = truth.mapping.find(tok);
    if (it == truth.mapping.end())
      data_error("make_seed_lexicon: source token '" + tok +
                 "' missing from the ground-truth mapping");
    out.emplace_back(tok, it->second.front());
  }
  if (out.empty()) data_error("make_seed_lexicon: no source tokens counted");
  return out;
}

// ---------------------------------------------------------------------------
// Ground-truth serialization (JSON)
// ---------------------------------------------------------------------------

inline void save_ground_truth(const std::string& path,
                              const GroundTruth& truth) {
  nlohmann::json j;
  j["version"] = kFormatVersion;
  j["kind"] = "truth";
  j["mapping"] = truth.mapping;
  j["lexicon"] = truth.lexicon;
  j["strong"] = truth.strong;
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline GroundTruth load_ground_truth(const std::string& path) {
  auto in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    data_error("ground truth " + path + ": " + e.what());
  }
  if (!j.contains("kind") || j["kind"] != "truth")
    data_error("ground truth " + path + ": wrong or missing kind");
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kFormatVersion)
    data_error("ground truth " + path + ": unsupported version");
  GroundTruth truth;
  try {
    truth.mapping =
        j.at("mapping").get<std::map<std::string, std::vector<std::string>>>();
    truth.lexicon = j.at("lexicon").get<std::map<std::string, int>>();
    truth.strong = j.at("strong").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    data_error("ground truth " + path + ": " + e.what());
  }
  for (const auto& [sw, tws] : truth.mapping)
    if (tws.empty() || tws.size() > 3)
      data_error("ground truth " + path + ": mapping for '" + sw +
                 "' must list 1-3 targets");
  for (const auto& [sw, pol] : truth.lexicon)
    if (pol != 1 && pol != -1)
      data_error("ground truth " + path + ": polarity of '" + sw +
                 "' must be +1 or -1");
  return truth;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalReport {
  long n = 0;
  long correct = 0;
  long tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  double acc_pos = 0.0;  // recall of the +1 class
  double acc_neg = 0.0;  // recall of the -1 class
};

inline EvalReport evaluate_accuracy(const FinalModel& model,
                                    const Projection& proj,
                                    const Vocabulary& vocab,
                                    const std::vector<Document>& test,
                                    int threads = 1) {
  if (test.empty()) data_error("evaluate_accuracy: empty test set");
  std::vector<int> labels(test.size());
  for (std::size_t i = 0; i < test.size(); ++i)
    labels[i] = detail::checked_label(test[i]);
  std::vector<int> preds(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    preds[i] = classify(model, proj, vocab, test[i]);
  });
  EvalReport r;
  r.n = static_cast<long>(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (labels[i] > 0)
      (preds[i] > 0 ? r.tp : r.fn) += 1;
    else
      (preds[i] > 0 ? r.fp : r.tn) += 1;
  }
  r.correct = r.tp + r.tn;
  r.accuracy = static_cast<double>(r.correct) / r.n;
  r.acc_pos = (r.tp + r.fn) ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.acc_neg = (r.tn + r.fp) ? static_cast<double>(r.tn) / (r.tn + r.fp) : 0.0;
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["correct"] = r.correct;
  j["accuracy"] = r.accuracy;
  j["accuracy_positive"] = r.acc_pos;
  j["accuracy_negative"] = r.acc_neg;
  j["confusion"] = {{"tp", r.tp}, {"tn", r.tn}, {"fp", r.fp}, {"fn", r.fn}};
  return j;
}

inline void save_eval_report(const std::string& path, const EvalReport& r) {
  auto out = open_output(path);
  out << to_json(r).dump(2) << '\n';
}

// Fraction of translation sets whose top-ranked candidate belongs to the
// true target set of the source word.
inline double mapping_precision_at_1(const std::vector<TranslationSet>& sets,
                                     const GroundTruth& truth) {
  if (sets.empty()) data_error("mapping_precision_at_1: no translation sets");
  long hits = 0;
  for (const auto& ts : sets) {
    auto it = truth.mapping.find(ts.source);
    if (it == truth.mapping.end())
      data_error("mapping_precision_at_1: source word '" + ts.source +
                 "' missing from the ground truth");
    if (ts.candidates.empty())
      data_error("mapping_precision_at_1: empty candidate list for '" +
                 ts.source + "'");
    const std::string& top = ts.candidates.front().first;
    const auto& tws = it->second;
    if (std::find(tws.begin(), tws.end(), top) != tws.end()) ++hits;
  }
  return static_cast<double>(hits) / sets.size();
}

// ---------------------------------------------------------------------------
// No-transfer reference system: a hinge classifier on raw source
// bag-of-words, applied to target documents after oracle word-for-word
// replacement through the ground-truth mapping.
// ---------------------------------------------------------------------------

struct NoTransferParams {
  int min_token_freq = 2;
  int epochs = 30;
  double lr = 0.1;
  double lambda = 1e-3;  // sum-form coefficient, trained as lambda/n
  std::uint64_t seed = 42;
};

inline double no_transfer_baseline(const std::vector<Document>& labeled_src,
                                   const std::vector<Document>& test_tgt,
                                   const GroundTruth& truth,
                                   const NoTransferParams& p = {}) {
  if (labeled_src.empty()) data_error("no_transfer_baseline: no labeled docs");
  if (test_tgt.empty()) data_error("no_transfer_baseline: empty test set");
  Vocabulary vocab = Vocabulary::build(labeled_src, p.min_token_freq);
  std::vector<BowVector> feats;
  std::vector<const BowVector*> xs;
  std::vector<int> ys;
  feats.reserve(labeled_src.size());
  for (const auto& d : labeled_src) {
    int y = detail::checked_label(d);
    std::optional<BowVector> x = try_vectorize(d, vocab);
    if (!x) continue;
    feats.push_back(std::move(*x));
    ys.push_back(y);
  }
  if (feats.empty())
    data_error("no_transfer_baseline: no labeled document survives "
               "vectorization");
  bool has_pos = false, has_neg = false;
  for (int y : ys) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    data_error("no_transfer_baseline: labeled data is single-class");
  for (const auto& f : feats) xs.push_back(&f);

  detail::SgdSchedule sched{p.epochs, p.lr,
                            p.lambda / static_cast<double>(xs.size())};
  auto weights =
      detail::sparse_sgd<Hinge>(xs, ys, {}, vocab.size(), sched, p.seed);
  std::vector<double> w(vocab.size(), 0.0);
  for (const auto& [j, val] : weights) w[j] = val;

  std::unordered_map<std::string, std::string> reverse;
  for (const auto& [sw, tws] : truth.mapping)
    for (const auto& tw : tws) reverse[tw] = sw;

  long correct = 0;
  for (const auto& d : test_tgt) {
    int y = detail::checked_label(d);
    Document replaced;
    replaced.id = d.id;
    replaced.lang = Lang::Src;
    for (const auto& t : d.tokens) {
      auto it = reverse.find(t);
      if (it == reverse.end())
        data_error("no_transfer_baseline: target token '" + t +
                   "' missing from the ground-truth mapping");
      replaced.tokens.push_back(it->second);
    }
    std::optional<BowVector> x = try_vectorize(replaced, vocab);
    double score = 0.0;
    if (x)
      for (std::size_t j = 0; j < x->idx.size(); ++j)
        score += w[x->idx[j]] * x->val[j];
    int pred = score >= 0.0 ? 1 : -1;
    if (pred == y) ++correct;
  }
  return static_cast<double>(correct) / test_tgt.size();
}

}  // namespace sclom
