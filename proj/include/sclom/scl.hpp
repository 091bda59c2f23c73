// Structural correspondence core: one linear predictor per pivot trained on
// unlabeled data, the stacked parameter matrix, and its rank-k projection.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sclom/common.hpp"
#include "sclom/corpus.hpp"
#include "sclom/loss.hpp"
#include "sclom/pivots.hpp"
#include "sclom/sgd.hpp"
#include "sclom/svd.hpp"

namespace sclom {

struct PivotPredictor {
  int index = 0;
  int dim = 0;                                   // |V|
  std::vector<std::pair<int, double>> weights;   // sparse, index ascending
};

struct PredictorMatrix {
  Eigen::SparseMatrix<double> w;  // |V| x m, column l = predictor l
  int vocab_dim() const { return static_cast<int>(w.rows()); }
  int num_pivots() const { return static_cast<int>(w.cols()); }
};

struct Projection {
  Eigen::MatrixXd theta;   // k x |V|, orthonormal rows
  Eigen::VectorXd sigma;   // k singular values, non-increasing
  int k() const { return static_cast<int>(theta.rows()); }
  int vocab_dim() const { return static_cast<int>(theta.cols()); }
};

struct PivotTrainParams {
  int epochs = 20;
  double lr = 1e-3;
  double reg = 1e-5;
  std::uint64_t seed = 42;
  bool subsample_negatives = true;  // cap negatives at 10x positives
  int threads = 1;
};

// +1 when the document contains the pivot's source word (source docs) or
// any of its translations (target docs), else -1.
inline int pivot_label(const Document& doc, const PivotPair& pivot) {
  if (doc.lang == Lang::Src) {
    for (const auto& t : doc.tokens)
      if (t == pivot.w_s) return 1;
    return -1;
  }
  for (const auto& t : doc.tokens)
    for (const auto& w : pivot.w_t)
      if (t == w) return 1;
  return -1;
}

namespace detail {

// Feature indices belonging to the pivot itself, sorted. Words missing from
// the vocabulary contribute nothing.
inline std::vector<int> pivot_feature_indices(const PivotPair& pivot,
                                              const Vocabulary& vocab) {
  std::vector<int> mask;
  if (const auto* e = vocab.find(Lang::Src, pivot.w_s))
    mask.push_back(e->index);
  for (const auto& w : pivot.w_t)
    if (const auto* e = vocab.find(Lang::Tgt, w)) mask.push_back(e->index);
  std::sort(mask.begin(), mask.end());
  mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
  return mask;
}

// Vectorized corpus reused across the m predictor trainings.
struct PivotTrainingCache {
  std::vector<BowVector> features;  // one per usable document
  std::vector<const Document*> docs;
  std::unordered_map<std::string, std::vector<int>> index;  // token -> rows

  PivotTrainingCache(const std::vector<Document>& unlabeled,
                     const Vocabulary& vocab) {
    features.reserve(unlabeled.size());
    for (const auto& doc : unlabeled) {
      std::optional<BowVector> v = try_vectorize(doc, vocab);
      if (!v) continue;  // document entirely out of vocabulary
      features.push_back(std::move(*v));
      docs.push_back(&doc);
    }
    if (features.empty())
      data_error("pivot training: no document survives vectorization");
    std::unordered_set<std::string> seen;
    for (int i = 0; i < static_cast<int>(docs.size()); ++i) {
      seen.clear();
      for (const auto& tok : docs[i]->tokens)
        if (seen.insert(tok).second) index[tok].push_back(i);
    }
  }

  // Row labels for one pivot: rows containing its words are +1.
  std::vector<int> positives(const PivotPair& pivot) const {
    std::vector<int> rows;
    auto add = [&](const std::string& w, Lang lang) {
      auto it = index.find(w);
      if (it == index.end()) return;
      for (int r : it->second)
        if (docs[r]->lang == lang) rows.push_back(r);
    };
    add(pivot.w_s, Lang::Src);
    for (const auto& w : pivot.w_t) add(w, Lang::Tgt);
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
  }
};

inline PivotPredictor train_one_pivot(const PivotTrainingCache& cache,
                                      const PivotPair& pivot,
                                      const Vocabulary& vocab,
                                      const PivotTrainParams& p,
                                      std::uint64_t seed) {
  const int n = static_cast<int>(cache.features.size());
  std::vector<int> pos_rows = cache.positives(pivot);
  if (pos_rows.empty())
    data_error("pivot '" + pivot.w_s +
               "': degenerate, no unlabeled document contains it "
               "(all-negative)");
  if (static_cast<int>(pos_rows.size()) == n)
    data_error("pivot '" + pivot.w_s +
               "': degenerate, every unlabeled document contains it "
               "(all-positive)");

  std::vector<char> is_pos(n, 0);
  for (int r : pos_rows) is_pos[r] = 1;
  std::vector<int> neg_rows;
  neg_rows.reserve(n - pos_rows.size());
  for (int r = 0; r < n; ++r)
    if (!is_pos[r]) neg_rows.push_back(r);

  if (p.subsample_negatives &&
      neg_rows.size() > 10 * pos_rows.size()) {
    Rng rng(seed ^ 0xdab4f1c3a55e1235ULL);
    rng.shuffle(neg_rows);
    neg_rows.resize(10 * pos_rows.size());
    std::sort(neg_rows.begin(), neg_rows.end());
  }

  std::vector<const BowVector*> xs;
  std::vector<int> ys;
  xs.reserve(pos_rows.size() + neg_rows.size());
  for (int r : pos_rows) {
    xs.push_back(&cache.features[r]);
    ys.push_back(1);
  }
  for (int r : neg_rows) {
    xs.push_back(&cache.features[r]);
    ys.push_back(-1);
  }

  std::vector<int> mask = pivot_feature_indices(pivot, vocab);
  PivotPredictor pred;
  pred.index = pivot.index;
  pred.dim = vocab.size();
  pred.weights = sparse_sgd<ModifiedHuber>(xs, ys, mask, pred.dim,
                                           {p.epochs, p.lr, p.reg}, seed);
  return pred;
}

}  // namespace detail

// Trains the predictor for a single pivot on the unlabeled corpus. The
// pivot's own feature indices are masked out of every input and end up
// exactly zero in the returned weights.
inline PivotPredictor train_pivot_predictor(
    const std::vector<Document>& unlabeled, const PivotPair& pivot,
    const Vocabulary& vocab, const PivotTrainParams& params) {
  detail::PivotTrainingCache cache(unlabeled, vocab);
  return detail::train_one_pivot(cache, pivot, vocab, params,
                                 params.seed + pivot.index);
}

// Trains all m predictors against one shared vectorization of the corpus.
// Each pivot gets seed base_seed + l, so the result does not depend on the
// thread schedule.
inline std::vector<PivotPredictor> train_pivot_predictors(
    const std::vector<Document>& unlabeled,
    const std::vector<PivotPair>& pivots, const Vocabulary& vocab,
    const PivotTrainParams& params) {
  if (pivots.empty()) data_error("train_pivot_predictors: no pivots");
  detail::PivotTrainingCache cache(unlabeled, vocab);
  std::vector<PivotPredictor> out(pivots.size());
  parallel_for(pivots.size(), params.threads, [&](std::size_t l) {
    out[l] = detail::train_one_pivot(cache, pivots[l], vocab, params,
                                     params.seed + pivots[l].index);
  });
  return out;
}

// Stacks the predictors column-wise. Predictors must arrive sorted by pivot
// index, complete from 0 to m-1.
inline PredictorMatrix assemble_predictor_matrix(
    const std::vector<PivotPredictor>& predictors) {
  if (predictors.empty())
    data_error("assemble_predictor_matrix: no predictors");
  const int dim = predictors.front().dim;
  const int m = static_cast<int>(predictors.size());
  std::vector<Eigen::Triplet<double>> entries;
  for (int l = 0; l < m; ++l) {
    const auto& p = predictors[l];
    if (p.index != l)
      data_error("assemble_predictor_matrix: expected pivot index " +
                 std::to_string(l) + ", got " + std::to_string(p.index) +
                 " (missing, duplicate, or out-of-order predictor)");
    if (p.dim != dim)
      data_error("assemble_predictor_matrix: predictor " + std::to_string(l) +
                 " has vocabulary size " + std::to_string(p.dim) +
                 ", expected " + std::to_string(dim));
    for (const auto& [j, w] : p.weights) {
      if (!std::isfinite(w))
        data_error("assemble_predictor_matrix: non-finite weight");
      entries.emplace_back(j, l, w);
    }
  }
  PredictorMatrix pm;
  pm.w.resize(dim, m);
  pm.w.setFromTriplets(entries.begin(), entries.end());
  return pm;
}

// Rank-k projection: rows of theta are the top-k left singular vectors of
// the predictor matrix.
inline Projection make_projection(const PredictorMatrix& pm, int k,
                                  std::uint64_t seed,
                                  int max_power_iters = 150) {
  SvdResult svd = truncated_svd(pm.w, k, seed, /*min_power_iters=*/4,
                                /*oversample=*/8, max_power_iters);
  Projection proj;
  proj.theta = svd.u.transpose();
  proj.sigma = svd.sigma;
  return proj;
}

inline Eigen::VectorXd project_doc(const Projection& proj, const BowVector& x) {
  if (x.dim != proj.vocab_dim())
    data_error("project_doc: document dim " + std::to_string(x.dim) +
               " does not match projection dim " +
               std::to_string(proj.vocab_dim()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(proj.k());
  for (std::size_t j = 0; j < x.idx.size(); ++j)
    out += x.val[j] * proj.theta.col(x.idx[j]);
  return out;
}

// Content-based identifier binding a trained model to the projection it was
// trained with. Stable across save/load because serialization round-trips
// doubles exactly.
inline std::uint64_t projection_ref(const Projection& proj) {
  std::uint64_t h =
      fnv1a(proj.theta.data(), sizeof(double) * proj.theta.size());
  return fnv1a(proj.sigma.data(), sizeof(double) * proj.sigma.size(), h);
}

inline void save_projection(const std::string& path, const Projection& proj) {
  std::ofstream out = open_output(path);
  write_version_line(out, "theta");
  out << proj.k() << ' ' << proj.vocab_dim() << '\n';
  for (int r = 0; r < proj.k(); ++r) {
    for (int c = 0; c < proj.vocab_dim(); ++c) {
      if (c) out << ' ';
      out << fmt_double(proj.theta(r, c));
    }
    out << '\n';
  }
  for (int i = 0; i < proj.sigma.size(); ++i) {
    if (i) out << ' ';
    out << fmt_double(proj.sigma[i]);
  }
  out << '\n';
}

inline Projection load_projection(const std::string& path) {
  std::ifstream in = open_input(path);
  check_version_line(in, "theta", /*required=*/true);
  std::string line;
  if (!std::getline(in, line))
    data_error("projection " + path + ": missing header");
  auto header = split_ws(line);
  if (header.size() != 2)
    data_error("projection " + path + ": header must be `k |V|`");
  long k = parse_long(header[0]);
  long dim = parse_long(header[1]);
  if (k < 1 || dim < 1 || k > dim)
    data_error("projection " + path + ": invalid dimensions " + line);
  Projection proj;
  proj.theta.resize(k, dim);
  for (long r = 0; r < k; ++r) {
    if (!std::getline(in, line))
      data_error("projection " + path + ": expected " + std::to_string(k) +
                 " rows");
    auto cells = split_ws(line);
    if (static_cast<long>(cells.size()) != dim)
      data_error("projection " + path + " row " + std::to_string(r) +
                 ": expected " + std::to_string(dim) + " values");
    for (long c = 0; c < dim; ++c) proj.theta(r, c) = parse_double(cells[c]);
  }
  if (!std::getline(in, line))
    data_error("projection " + path + ": missing singular-value line");
  auto cells = split_ws(line);
  if (static_cast<long>(cells.size()) != k)
    data_error("projection " + path + ": expected " + std::to_string(k) +
               " singular values");
  proj.sigma.resize(k);
  for (long i = 0; i < k; ++i) proj.sigma[i] = parse_double(cells[i]);
  if (!proj.theta.allFinite() || !proj.sigma.allFinite())
    data_error("projection " + path + ": non-finite entries");
  Eigen::MatrixXd gram = proj.theta * proj.theta.transpose();
  gram -= Eigen::MatrixXd::Identity(k, k);
  if (gram.cwiseAbs().maxCoeff() > 1e-8)
    data_error("projection " + path + ": rows are not orthonormal");
  return proj;
}

}  // namespace sclom
