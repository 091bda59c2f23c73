// Monolingual distributed word representations: CBOW with negative
// sampling, text-format persistence, and cosine nearest-neighbor queries.
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "sclom/common.hpp"
#include "sclom/corpus.hpp"

namespace sclom {

struct EmbeddingTable {
  Lang lang = Lang::Src;
  int dim = 0;
  std::vector<std::string> tokens;                // row -> word
  std::unordered_map<std::string, int> index;     // word -> row
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      vectors;                                    // |tokens| x dim

  int size() const { return static_cast<int>(tokens.size()); }

  const double* row(int r) const { return vectors.row(r).data(); }

  int find(const std::string& word) const {
    auto it = index.find(word);
    return it == index.end() ? -1 : it->second;
  }

  Eigen::VectorXd vec(const std::string& word) const {
    int r = find(word);
    if (r < 0) data_error("word '" + word + "' not in embedding table");
    return vectors.row(r).transpose();
  }
};

// ---------------------------------------------------------------------------
// Cosine similarity and neighbor search
// ---------------------------------------------------------------------------

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    data_error("cosine: dimension mismatch " + std::to_string(a.size()) +
               " vs " + std::to_string(b.size()));
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) data_error("cosine of a zero vector");
  double c = a.dot(b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

// Exactly min(n, |words|) entries, cosine descending, ties broken by
// ascending token string.
inline std::vector<std::pair<std::string, double>> top_neighbors(
    const EmbeddingTable& table, const Eigen::VectorXd& query, int n) {
  if (n < 1) config_error("top_neighbors: n must be >= 1");
  if (query.size() != table.dim)
    data_error("top_neighbors: query dimension mismatch");
  double qn = query.norm();
  if (qn == 0.0) data_error("top_neighbors: zero query vector");

  int count = table.size();
  std::vector<int> order(count);
  std::vector<double> score(count);
  for (int r = 0; r < count; ++r) {
    order[r] = r;
    Eigen::Map<const Eigen::VectorXd> row(table.row(r), table.dim);
    double rn = row.norm();
    score[r] = rn == 0.0 ? -2.0 : std::clamp(row.dot(query) / (rn * qn), -1.0, 1.0);
  }
  int take = std::min(n, count);
  auto better = [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return table.tokens[a] < table.tokens[b];
  };
  std::partial_sort(order.begin(), order.begin() + take, order.end(), better);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (int i = 0; i < take; ++i)
    out.emplace_back(table.tokens[order[i]], score[order[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// CBOW + negative sampling trainer
// ---------------------------------------------------------------------------

struct CbowParams {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  long min_count = 5;     // strict: keep freq > min_count
  double subsample = 0.0; // 0 disables frequent-word subsampling
  int threads = 1;        // >1 trades determinism for speed
  std::uint64_t seed = 1;
};

namespace detail {

struct CbowVocab {
  std::vector<std::string> words;   // sorted by freq desc, token asc
  std::vector<long> freqs;
  std::unordered_map<std::string, int> index;
  std::vector<double> noise_cdf;    // cumulative unigram^0.75
  long train_words = 0;
};

inline CbowVocab build_cbow_vocab(const std::vector<Document>& docs,
                                  long min_count) {
  std::unordered_map<std::string, long> counts;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) ++counts[t];
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [w, c] : counts)
    if (c > min_count) kept.emplace_back(w, c);
  if (kept.empty())
    data_error("embedding corpus has no word above min_count=" +
               std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  CbowVocab v;
  v.words.reserve(kept.size());
  v.freqs.reserve(kept.size());
  double cum = 0.0;
  v.noise_cdf.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    v.words.push_back(kept[i].first);
    v.freqs.push_back(kept[i].second);
    v.index.emplace(kept[i].first, static_cast<int>(i));
    v.train_words += kept[i].second;
    cum += std::pow(static_cast<double>(kept[i].second), 0.75);
    v.noise_cdf.push_back(cum);
  }
  return v;
}

inline int sample_noise(const CbowVocab& v, Rng& rng) {
  double u = rng.uniform() * v.noise_cdf.back();
  auto it = std::upper_bound(v.noise_cdf.begin(), v.noise_cdf.end(), u);
  int i = static_cast<int>(it - v.noise_cdf.begin());
  return std::min(i, static_cast<int>(v.noise_cdf.size()) - 1);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// One pass over [begin, end) sentences. `positions_done` tracks global
// progress for the linear learning-rate decay.
inline void cbow_train_range(
    const std::vector<std::vector<int>>& sentences, std::size_t begin,
    std::size_t end, const CbowVocab& vocab, const CbowParams& p,
    std::vector<double>& input, std::vector<double>& output,
    std::uint64_t rng_seed, std::atomic<long>& positions_done,
    long total_positions) {
  Rng rng(rng_seed);
  const int dim = p.dim;
  std::vector<double> hidden(dim), hidden_grad(dim);
  long local = 0;
  for (std::size_t s = begin; s < end; ++s) {
    const auto& sent = sentences[s];
    int len = static_cast<int>(sent.size());
    for (int t = 0; t < len; ++t) {
      // linear decay, refreshed every 256 positions
      if ((local & 255) == 0)
        positions_done.fetch_add(local), local = 0;
      long done = positions_done.load(std::memory_order_relaxed) + local;
      double alpha =
          p.lr * std::max(1e-4, 1.0 - static_cast<double>(done) /
                                          (static_cast<double>(total_positions) + 1.0));
      ++local;

      if (p.subsample > 0.0) {
        double f = static_cast<double>(vocab.freqs[sent[t]]) /
                   static_cast<double>(vocab.train_words);
        double keep = (std::sqrt(f / p.subsample) + 1.0) * p.subsample / f;
        if (keep < 1.0 && rng.uniform() > keep) continue;
      }

      int half = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.window)));
      int lo = std::max(0, t - half);
      int hi = std::min(len - 1, t + half);
      int cw = hi - lo + 1 - 1;
      if (cw <= 0) continue;

      std::fill(hidden.begin(), hidden.end(), 0.0);
      std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
      for (int c = lo; c <= hi; ++c) {
        if (c == t) continue;
        const double* vin = &input[static_cast<std::size_t>(sent[c]) * dim];
        for (int d = 0; d < dim; ++d) hidden[d] += vin[d];
      }
      for (int d = 0; d < dim; ++d) hidden[d] /= cw;

      int target = sent[t];
      for (int k = 0; k <= p.negatives; ++k) {
        int word;
        double label;
        if (k == 0) {
          word = target;
          label = 1.0;
        } else {
          int tries = 0;
          do {
            word = sample_noise(vocab, rng);
          } while (word == target && ++tries < 16);
          if (word == target) continue;
          label = 0.0;
        }
        double* vout = &output[static_cast<std::size_t>(word) * dim];
        double z = 0.0;
        for (int d = 0; d < dim; ++d) z += hidden[d] * vout[d];
        double g = (label - sigmoid(z)) * alpha;
        for (int d = 0; d < dim; ++d) {
          hidden_grad[d] += g * vout[d];
          vout[d] += g * hidden[d];
        }
      }
      for (int c = lo; c <= hi; ++c) {
        if (c == t) continue;
        double* vin = &input[static_cast<std::size_t>(sent[c]) * dim];
        for (int d = 0; d < dim; ++d) vin[d] += hidden_grad[d];
      }
    }
  }
  positions_done.fetch_add(local);
}

}  // namespace detail

// Trains CBOW embeddings over a single-language corpus. Deterministic for
// threads == 1 and a fixed seed; with threads > 1 the shared matrices are
// updated with relaxed consistency and determinism is not promised.
inline EmbeddingTable train_cbow(const std::vector<Document>& docs,
                                 const CbowParams& p) {
  if (docs.empty()) data_error("train_cbow: empty corpus");
  if (p.dim < 2) config_error("train_cbow: dim must be >= 2");
  if (p.window < 1) config_error("train_cbow: window must be >= 1");
  if (p.negatives < 1) config_error("train_cbow: negatives must be >= 1");
  if (p.epochs < 0) config_error("train_cbow: epochs must be >= 0");
  Lang lang = docs.front().lang;
  for (const auto& d : docs)
    if (d.lang != lang) data_error("train_cbow: mixed-language corpus");

  auto vocab = detail::build_cbow_vocab(docs, p.min_count);
  int nwords = static_cast<int>(vocab.words.size());

  std::vector<std::vector<int>> sentences;
  sentences.reserve(docs.size());
  long total_positions_per_epoch = 0;
  for (const auto& d : docs) {
    std::vector<int> s;
    s.reserve(d.tokens.size());
    for (const auto& t : d.tokens) {
      auto it = vocab.index.find(t);
      if (it != vocab.index.end()) s.push_back(it->second);
    }
    if (!s.empty()) {
      total_positions_per_epoch += static_cast<long>(s.size());
      sentences.push_back(std::move(s));
    }
  }
  if (sentences.empty())
    data_error("train_cbow: corpus empty after frequency filtering");

  // input vectors uniform in [-0.5/dim, 0.5/dim], output vectors zero
  std::vector<double> input(static_cast<std::size_t>(nwords) * p.dim);
  std::vector<double> output(static_cast<std::size_t>(nwords) * p.dim, 0.0);
  {
    Rng init_rng(p.seed);
    for (auto& x : input) x = (init_rng.uniform() - 0.5) / p.dim;
  }

  long total_positions = total_positions_per_epoch * std::max(1, p.epochs);
  std::atomic<long> positions_done{0};
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    if (p.threads <= 1) {
      detail::cbow_train_range(sentences, 0, sentences.size(), vocab, p, input,
                               output, p.seed + 0x9e3779b97f4a7c15ull * (epoch + 1),
                               positions_done, total_positions);
    } else {
      std::vector<std::thread> pool;
      std::size_t per = (sentences.size() + p.threads - 1) / p.threads;
      for (int t = 0; t < p.threads; ++t) {
        std::size_t b = std::min(sentences.size(), t * per);
        std::size_t e = std::min(sentences.size(), b + per);
        if (b >= e) break;
        pool.emplace_back([&, b, e, t]() {
          detail::cbow_train_range(
              sentences, b, e, vocab, p, input, output,
              p.seed + 0x9e3779b97f4a7c15ull * (epoch + 1) + 0x243f6a8885a308d3ull * (t + 1),
              positions_done, total_positions);
        });
      }
      for (auto& th : pool) th.join();
    }
  }

  EmbeddingTable table;
  table.lang = lang;
  table.dim = p.dim;
  table.tokens = vocab.words;
  table.index = vocab.index;
  table.vectors.resize(nwords, p.dim);
  for (int r = 0; r < nwords; ++r)
    for (int d = 0; d < p.dim; ++d)
      table.vectors(r, d) = input[static_cast<std::size_t>(r) * p.dim + d];
  for (int r = 0; r < nwords; ++r)
    if (!table.vectors.row(r).allFinite())
      internal_error("train_cbow produced non-finite vectors");
  return table;
}

// ---------------------------------------------------------------------------
// External-vector text format: "<word_count> <dim>" then one line per word
// "word v1 v2 ... vdim". The CLI prepends a version tag to its artifacts;
// plain files from external tools load without one.
// ---------------------------------------------------------------------------

inline void save_embeddings(const EmbeddingTable& table,
                            const std::string& path,
                            bool with_version_tag = false) {
  auto out = open_output(path);
  if (with_version_tag) write_version_line(out, "embeddings");
  out << table.size() << ' ' << table.dim << '\n';
  for (int r = 0; r < table.size(); ++r) {
    out << table.tokens[r];
    for (int d = 0; d < table.dim; ++d)
      out << ' ' << fmt_double(table.vectors(r, d));
    out << '\n';
  }
}

inline EmbeddingTable load_embeddings(const std::string& path, Lang lang) {
  auto in = open_input(path);
  check_version_line(in, "embeddings", /*required=*/false);
  std::string line;
  if (!std::getline(in, line)) data_error("empty embedding file: " + path);
  auto header = split_ws(line);
  if (header.size() != 2)
    data_error("bad embedding header '" + line + "' (want '<count> <dim>')");
  long count = parse_long(header[0]);
  long dim = parse_long(header[1]);
  if (count < 1 || dim < 1)
    data_error("bad embedding header counts in " + path);

  EmbeddingTable t;
  t.lang = lang;
  t.dim = static_cast<int>(dim);
  t.vectors.resize(count, dim);
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= count) data_error("more rows than declared in " + path);
    auto f = split_ws(line);
    if (static_cast<long>(f.size()) != dim + 1)
      data_error("embedding row has " + std::to_string(f.size() - 1) +
                 " values, expected " + std::to_string(dim));
    if (t.index.count(f[0]))
      data_error("duplicate word '" + f[0] + "' in " + path);
    t.index.emplace(f[0], static_cast<int>(row));
    t.tokens.push_back(f[0]);
    for (long d = 0; d < dim; ++d)
      t.vectors(row, d) = parse_double(f[static_cast<std::size_t>(d) + 1]);
    ++row;
  }
  if (row != count)
    data_error("declared " + std::to_string(count) + " rows, found " +
               std::to_string(row) + " in " + path);
  return t;
}

}  // namespace sclom
