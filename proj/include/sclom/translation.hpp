// Linear map between the two embedding spaces, learned from a seed lexicon,
// plus the thresholded one-to-many translation rule built on top of it.
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "sclom/common.hpp"
#include "sclom/embeddings.hpp"

namespace sclom {

struct BilingualLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;
  int dropped = 0;  // pairs discarded at load because a side was out of vocab
  int num() const { return static_cast<int>(pairs.size()); }
};

struct TranslationMatrix {
  Eigen::MatrixXd w;  // d_tgt x d_src
  int d_src() const { return static_cast<int>(w.cols()); }
  int d_tgt() const { return static_cast<int>(w.rows()); }
};

// A source word with its ranked target candidates. The first `num_chosen`
// candidates are the ones the gap rule kept.
struct TranslationSet {
  std::string source;
  std::vector<std::pair<std::string, double>> candidates;  // scores descending
  int num_chosen = 0;

  std::vector<std::string> chosen_tokens() const {
    std::vector<std::string> out;
    out.reserve(num_chosen);
    for (int i = 0; i < num_chosen; ++i) out.push_back(candidates[i].first);
    return out;
  }
};

// Reads `source<TAB>target` pairs. Pairs whose source or target word is
// missing from the corresponding table are dropped and counted, not fatal.
inline BilingualLexicon load_lexicon(const std::string& path,
                                     const EmbeddingTable& src,
                                     const EmbeddingTable& tgt) {
  std::ifstream in = open_input(path);
  check_version_line(in, "lexicon", /*required=*/false);
  BilingualLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      data_error("lexicon " + path + " line " + std::to_string(lineno) +
                 ": expected source<TAB>target");
    std::string s = line.substr(0, tab), t = line.substr(tab + 1);
    if (src.find(s) < 0 || tgt.find(t) < 0) {
      ++lex.dropped;
      continue;
    }
    lex.pairs.emplace_back(std::move(s), std::move(t));
  }
  if (lex.pairs.empty())
    data_error("lexicon " + path + ": no usable pairs after vocabulary filter");
  return lex;
}

inline void save_lexicon(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::ofstream out = open_output(path);
  for (const auto& [s, t] : pairs) out << s << '\t' << t << '\n';
}

// Least-squares fit of W minimizing sum_i |W x_i - z_i|^2 + ridge*|W|_F^2,
// solved through the normal equations W (X X^T + ridge I) = Z X^T.
inline TranslationMatrix fit_translation(const BilingualLexicon& lex,
                                         const EmbeddingTable& src,
                                         const EmbeddingTable& tgt,
                                         double ridge = 1e-6) {
  if (lex.pairs.empty()) data_error("fit_translation: empty lexicon");
  if (ridge < 0.0) config_error("fit_translation: ridge must be >= 0");
  const int ds = src.dim, dt = tgt.dim;
  const int n = lex.num();
  Eigen::MatrixXd x(ds, n), z(dt, n);
  for (int i = 0; i < n; ++i) {
    x.col(i) = src.vec(lex.pairs[i].first);
    z.col(i) = tgt.vec(lex.pairs[i].second);
  }
  Eigen::MatrixXd gram = x * x.transpose();
  if (ridge == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (lu.rank() < ds)
      data_error(
          "fit_translation: seed pairs span only " +
          std::to_string(lu.rank()) + " of " + std::to_string(ds) +
          " source dimensions; the fit is ill-conditioned. Add more pairs "
          "or set ridge > 0.");
  } else {
    gram.diagonal().array() += ridge;
  }
  Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  TranslationMatrix tm;
  // gram is symmetric, so solving gram * W^T = X Z^T gives W
  tm.w = solver.solve(x * z.transpose()).transpose();
  if (!tm.w.allFinite()) internal_error("fit_translation: non-finite result");
  return tm;
}

inline Eigen::VectorXd project(const TranslationMatrix& tm,
                               const Eigen::VectorXd& x) {
  if (x.size() != tm.d_src())
    data_error("project: vector length " + std::to_string(x.size()) +
               " does not match translation input dim " +
               std::to_string(tm.d_src()));
  return tm.w * x;
}

namespace detail {

// The gap rule on three descending similarity scores: how many of the top
// candidates count as translations.
inline int gap_rule_chosen(double d1, double d2, double d3, double phi) {
  if (d1 - d2 < phi && d2 - d3 < phi) return 3;
  if (d1 - d2 < phi) return 2;
  return 1;
}

}  // namespace detail

// Projects the source word into the target space, takes its three nearest
// target words by cosine similarity, and keeps a prefix of them: all three
// when both consecutive score gaps are under phi, two when only the first
// gap is, one otherwise.
inline TranslationSet translate_one_to_many(const std::string& word,
                                            const TranslationMatrix& tm,
                                            const EmbeddingTable& src,
                                            const EmbeddingTable& tgt,
                                            int p_n, double phi) {
  if (p_n != 3)
    config_error("translate_one_to_many: only p_n = 3 is supported");
  if (!(phi > 0.0)) config_error("translate_one_to_many: phi must be > 0");
  if (src.find(word) < 0)
    data_error("translate_one_to_many: '" + word +
               "' is not in the source vocabulary");
  if (tgt.size() < 3)
    data_error("translate_one_to_many: target vocabulary has fewer than 3 words");
  TranslationSet set;
  set.source = word;
  Eigen::VectorXd b = project(tm, src.vec(word));
  set.candidates = top_neighbors(tgt, b, 3);
  set.num_chosen =
      detail::gap_rule_chosen(set.candidates[0].second, set.candidates[1].second,
                              set.candidates[2].second, phi);
  return set;
}

inline void save_translation_matrix(const std::string& path,
                                    const TranslationMatrix& tm) {
  std::ofstream out = open_output(path);
  write_version_line(out, "translation");
  out << tm.d_tgt() << ' ' << tm.d_src() << '\n';
  for (int r = 0; r < tm.d_tgt(); ++r) {
    for (int c = 0; c < tm.d_src(); ++c) {
      if (c) out << ' ';
      out << fmt_double(tm.w(r, c));
    }
    out << '\n';
  }
}

inline TranslationMatrix load_translation_matrix(const std::string& path) {
  std::ifstream in = open_input(path);
  check_version_line(in, "translation", /*required=*/false);
  std::string line;
  if (!std::getline(in, line))
    data_error("translation matrix " + path + ": missing header");
  auto header = split_ws(line);
  if (header.size() != 2)
    data_error("translation matrix " + path + ": header must be `d_T d_S`");
  long dt = parse_long(header[0]);
  long ds = parse_long(header[1]);
  if (dt < 1 || ds < 1)
    data_error("translation matrix " + path + ": non-positive dimensions");
  TranslationMatrix tm;
  tm.w.resize(dt, ds);
  for (long r = 0; r < dt; ++r) {
    if (!std::getline(in, line))
      data_error("translation matrix " + path + ": expected " +
                 std::to_string(dt) + " rows, got " + std::to_string(r));
    auto cells = split_ws(line);
    if (static_cast<long>(cells.size()) != ds)
      data_error("translation matrix " + path + " row " + std::to_string(r) +
                 ": expected " + std::to_string(ds) + " values");
    for (long c = 0; c < ds; ++c) tm.w(r, c) = parse_double(cells[c]);
  }
  if (!tm.w.allFinite())
    data_error("translation matrix " + path + ": non-finite entries");
  return tm;
}

}  // namespace sclom
