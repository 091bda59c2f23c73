// Pivot selection: rank source words by mutual information with the class
// label, translate each candidate one-to-many, and keep those frequent
// enough on both sides.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sclom/common.hpp"
#include "sclom/corpus.hpp"
#include "sclom/embeddings.hpp"
#include "sclom/translation.hpp"

namespace sclom {

struct PivotCandidate {
  std::string word;
  double mi = 0.0;  // nats
};

struct PivotPair {
  int index = 0;                   // position l in the pivot list
  std::string w_s;                 // source word
  std::vector<std::string> w_t;    // its chosen translations, 1..3 words
};

struct PivotSelection {
  std::vector<PivotPair> pivots;
  bool incomplete = false;  // fewer survivors than requested
};

// Everything translate_one_to_many needs, bundled so selection code can
// carry one handle.
struct TranslationContext {
  const TranslationMatrix& tm;
  const EmbeddingTable& src;
  const EmbeddingTable& tgt;
  int p_n = 3;
  double phi = 0.1;
  bool top1 = false;  // one-to-one reference mode: keep only the best candidate

  TranslationSet translate(const std::string& word) const {
    TranslationSet set = translate_one_to_many(word, tm, src, tgt, p_n, phi);
    if (top1) set.num_chosen = 1;
    return set;
  }
};

namespace detail {

// MI of a 2x2 presence/label table with add-one smoothing, natural log.
// c_py = present docs per label, n_y = total docs per label.
inline double mi_from_counts(long present_pos, long present_neg, long n_pos,
                             long n_neg) {
  const double n = static_cast<double>(n_pos + n_neg) + 4.0;
  const double cell[2][2] = {
      {(static_cast<double>(n_pos - present_pos) + 1.0) / n,
       (static_cast<double>(n_neg - present_neg) + 1.0) / n},
      {(static_cast<double>(present_pos) + 1.0) / n,
       (static_cast<double>(present_neg) + 1.0) / n}};
  double mi = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int y = 0; y < 2; ++y) {
      double pb = cell[b][0] + cell[b][1];
      double py = cell[0][y] + cell[1][y];
      mi += cell[b][y] * std::log(cell[b][y] / (pb * py));
    }
  return mi;
}

inline int checked_label(const Document& doc) {
  if (!doc.label || (*doc.label != 1 && *doc.label != -1))
    data_error("document '" + doc.id + "' lacks a +1/-1 label");
  return *doc.label;
}

}  // namespace detail

// Mutual information between the word's binary document presence and the
// label over the labeled corpus.
inline double mutual_information(const std::string& word,
                                 const std::vector<Document>& labeled) {
  if (labeled.empty()) data_error("mutual_information: no labeled documents");
  long present_pos = 0, present_neg = 0, n_pos = 0, n_neg = 0;
  for (const auto& doc : labeled) {
    int y = detail::checked_label(doc);
    (y > 0 ? n_pos : n_neg) += 1;
    bool present =
        std::find(doc.tokens.begin(), doc.tokens.end(), word) !=
        doc.tokens.end();
    if (present) (y > 0 ? present_pos : present_neg) += 1;
  }
  return detail::mi_from_counts(present_pos, present_neg, n_pos, n_neg);
}

// MI for every candidate word in one pass over the corpus, sorted by MI
// descending with ties broken by ascending token.
inline std::vector<PivotCandidate> rank_pivot_candidates(
    const std::vector<Document>& labeled,
    const std::vector<std::string>& candidates) {
  if (labeled.empty())
    data_error("rank_pivot_candidates: no labeled documents");
  std::unordered_map<std::string, std::pair<long, long>> present;
  present.reserve(candidates.size());
  for (const auto& w : candidates) present.emplace(w, std::make_pair(0L, 0L));
  long n_pos = 0, n_neg = 0;
  std::unordered_set<std::string> seen;
  for (const auto& doc : labeled) {
    int y = detail::checked_label(doc);
    (y > 0 ? n_pos : n_neg) += 1;
    seen.clear();
    for (const auto& tok : doc.tokens) {
      if (!seen.insert(tok).second) continue;
      auto it = present.find(tok);
      if (it == present.end()) continue;
      (y > 0 ? it->second.first : it->second.second) += 1;
    }
  }
  std::vector<PivotCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& w : candidates) {
    const auto& [pp, pn] = present.at(w);
    ranked.push_back({w, detail::mi_from_counts(pp, pn, n_pos, n_neg)});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const PivotCandidate& a, const PivotCandidate& b) {
              if (a.mi != b.mi) return a.mi > b.mi;
              return a.word < b.word;
            });
  return ranked;
}

namespace detail {

// token -> number of documents containing it
inline std::unordered_map<std::string, long> doc_frequencies(
    const std::vector<Document>& docs) {
  std::unordered_map<std::string, long> df;
  std::unordered_set<std::string> seen;
  for (const auto& doc : docs) {
    seen.clear();
    for (const auto& tok : doc.tokens)
      if (seen.insert(tok).second) df[tok] += 1;
  }
  return df;
}

// token -> sorted list of documents (by position) containing it
inline std::unordered_map<std::string, std::vector<int>> inverted_index(
    const std::vector<Document>& docs) {
  std::unordered_map<std::string, std::vector<int>> index;
  std::unordered_set<std::string> seen;
  for (int i = 0; i < static_cast<int>(docs.size()); ++i) {
    seen.clear();
    for (const auto& tok : docs[i].tokens)
      if (seen.insert(tok).second) index[tok].push_back(i);
  }
  return index;
}

// number of documents containing any of the words (union convention)
inline long union_doc_frequency(
    const std::vector<std::string>& words,
    const std::unordered_map<std::string, std::vector<int>>& index) {
  std::vector<const std::vector<int>*> lists;
  for (const auto& w : words) {
    auto it = index.find(w);
    if (it != index.end()) lists.push_back(&it->second);
  }
  if (lists.empty()) return 0;
  if (lists.size() == 1) return static_cast<long>(lists[0]->size());
  std::vector<int> merged;
  for (const auto* l : lists) merged.insert(merged.end(), l->begin(), l->end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return static_cast<long>(merged.size());
}

}  // namespace detail

// Ranks the source-table vocabulary by MI and walks the ranking: each
// candidate is translated and kept when its source document frequency
// (labeled + unlabeled source docs) and the union document frequency of its
// translations (unlabeled target docs) both reach delta. The walk stops
// once m pivots are collected. With strict_topm the walk is limited to the
// m highest-MI candidates, so filtering can leave fewer pivots.
inline PivotSelection select_pivots(const std::vector<Document>& labeled,
                                    const std::vector<Document>& unlabeled_src,
                                    const std::vector<Document>& unlabeled_tgt,
                                    int m, long delta,
                                    const TranslationContext& ctx,
                                    bool strict_topm = false) {
  if (m < 1) config_error("select_pivots: m must be >= 1");
  if (delta < 0) config_error("select_pivots: delta must be >= 0");

  std::vector<PivotCandidate> ranked =
      rank_pivot_candidates(labeled, ctx.src.tokens);

  std::vector<Document> all_src;
  all_src.reserve(labeled.size() + unlabeled_src.size());
  all_src.insert(all_src.end(), labeled.begin(), labeled.end());
  all_src.insert(all_src.end(), unlabeled_src.begin(), unlabeled_src.end());
  auto src_df = detail::doc_frequencies(all_src);
  auto tgt_index = detail::inverted_index(unlabeled_tgt);

  PivotSelection result;
  const int walk_limit =
      strict_topm ? std::min<int>(m, static_cast<int>(ranked.size()))
                  : static_cast<int>(ranked.size());
  for (int i = 0; i < walk_limit; ++i) {
    if (static_cast<int>(result.pivots.size()) == m) break;
    const auto& cand = ranked[i];
    auto df_it = src_df.find(cand.word);
    long sdf = df_it == src_df.end() ? 0 : df_it->second;
    if (sdf < delta) continue;
    TranslationSet set = ctx.translate(cand.word);
    std::vector<std::string> chosen = set.chosen_tokens();
    if (detail::union_doc_frequency(chosen, tgt_index) < delta) continue;
    PivotPair pair;
    pair.index = static_cast<int>(result.pivots.size());
    pair.w_s = cand.word;
    pair.w_t = std::move(chosen);
    result.pivots.push_back(std::move(pair));
  }
  result.incomplete = static_cast<int>(result.pivots.size()) < m;
  return result;
}

inline void save_pivots(const std::string& path,
                        const std::vector<PivotPair>& pivots) {
  std::ofstream out = open_output(path);
  write_version_line(out, "pivots");
  for (const auto& p : pivots) {
    out << p.index << '\t' << p.w_s << '\t';
    for (std::size_t i = 0; i < p.w_t.size(); ++i) {
      if (i) out << ',';
      out << p.w_t[i];
    }
    out << '\n';
  }
}

inline std::vector<PivotPair> load_pivots(const std::string& path) {
  std::ifstream in = open_input(path);
  check_version_line(in, "pivots", /*required=*/true);
  std::vector<PivotPair> pivots;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_char(line, '\t');
    if (fields.size() != 3)
      data_error("pivot file " + path + ": expected 3 tab-separated fields");
    PivotPair p;
    p.index = static_cast<int>(parse_long(fields[0]));
    if (p.index != static_cast<int>(pivots.size()))
      data_error("pivot file " + path + ": index " + fields[0] +
                 " out of order (expected " +
                 std::to_string(pivots.size()) + ")");
    p.w_s = fields[1];
    for (auto& t : split_char(fields[2], ',')) {
      if (t.empty())
        data_error("pivot file " + path + ": pivot " + p.w_s +
                   " has an empty translation");
      p.w_t.push_back(std::move(t));
    }
    if (p.w_t.empty() || p.w_t.size() > 3)
      data_error("pivot file " + path + ": pivot " + p.w_s +
                 " must have 1..3 translations");
    pivots.push_back(std::move(p));
  }
  return pivots;
}

}  // namespace sclom
