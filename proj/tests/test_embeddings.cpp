#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "sclom/embeddings.hpp"

using namespace sclom;

namespace {

Document doc_of(std::vector<std::string> toks, Lang lang = Lang::Src) {
  static int n = 0;
  Document d;
  d.id = "d" + std::to_string(n++);
  d.lang = lang;
  d.tokens = std::move(toks);
  return d;
}

// Extended-precision cosine oracle (long double accumulation).
double cosine_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  long double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

// Corpus where p and q appear in identical contexts (uniform swap), while
// r and s live in disjoint context pools and never co-occur.
std::vector<Document> interchangeable_corpus(int n_sentences, Rng& rng) {
  std::vector<std::string> shared = {"c0", "c1", "c2", "c3", "c4", "c5"};
  std::vector<std::string> only_r = {"ra0", "ra1", "ra2", "ra3"};
  std::vector<std::string> only_s = {"sb0", "sb1", "sb2", "sb3"};
  std::vector<Document> docs;
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[rng.below(pool.size())];
  };
  for (int i = 0; i < n_sentences; ++i) {
    std::string x = rng.below(2) == 0 ? "p" : "q";
    docs.push_back(doc_of({pick(shared), pick(shared), x, pick(shared),
                           pick(shared)}));
    docs.push_back(doc_of({pick(only_r), pick(only_r), "r", pick(only_r),
                           pick(only_r)}));
    docs.push_back(doc_of({pick(only_s), pick(only_s), "s", pick(only_s),
                           pick(only_s)}));
  }
  return docs;
}

CbowParams small_params() {
  CbowParams p;
  p.dim = 16;
  p.window = 2;
  p.negatives = 5;
  p.epochs = 40;
  p.lr = 0.05;
  p.min_count = 2;
  p.seed = 91;
  return p;
}

}  // namespace

TEST_CASE("cosine basics") {
  Eigen::VectorXd v(3);
  v << 0.3, -1.2, 2.0;
  CHECK(cosine(v, v) == Catch::Approx(1.0).margin(1e-15));
  Eigen::VectorXd e1(2), e2(2);
  e1 << 1, 0;
  e2 << 0, 1;
  CHECK(cosine(e1, e2) == 0.0);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(cosine(e1, z), SclError);
}

TEST_CASE("cosine matches extended-precision oracle and is symmetric") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd a(24), b(24);
    for (int i = 0; i < 24; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    double c = cosine(a, b);
    CHECK(std::abs(c - cosine_oracle(a, b)) < 1e-12);
    CHECK(std::abs(c - cosine(b, a)) < 1e-12);
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
  }
}

TEST_CASE("top_neighbors finds an exact row first and truncates correctly") {
  EmbeddingTable t;
  t.lang = Lang::Tgt;
  t.dim = 3;
  t.tokens = {"aa", "bb", "cc"};
  for (int i = 0; i < 3; ++i) t.index[t.tokens[i]] = i;
  t.vectors.resize(3, 3);
  t.vectors << 1, 0, 0, 0, 1, 0, 0.9, 0.1, 0;

  Eigen::VectorXd q(3);
  q << 1, 0, 0;
  auto top = top_neighbors(t, q, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].first == "aa");
  CHECK(top[0].second == Catch::Approx(1.0).margin(1e-12));

  auto all = top_neighbors(t, q, 10);
  CHECK(all.size() == 3);
  for (std::size_t i = 1; i < all.size(); ++i)
    CHECK(all[i - 1].second >= all[i].second);

  CHECK_THROWS_AS(top_neighbors(t, Eigen::VectorXd::Zero(3), 1), SclError);
}

TEST_CASE("top_neighbors equals a brute-force scan with tie rule") {
  Rng rng(17);
  EmbeddingTable t;
  t.lang = Lang::Tgt;
  t.dim = 8;
  int n = 100;
  t.vectors.resize(n, 8);
  for (int r = 0; r < n; ++r) {
    t.tokens.push_back("w" + std::to_string(r));
    t.index[t.tokens.back()] = r;
    for (int d = 0; d < 8; ++d) t.vectors(r, d) = rng.normal();
  }
  // duplicate one row so a cosine tie exists; tie resolves by token string
  t.vectors.row(41) = t.vectors.row(7);

  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd q(8);
    for (int d = 0; d < 8; ++d) q[d] = rng.normal();
    auto got = top_neighbors(t, q, 12);

    std::vector<std::pair<std::string, double>> oracle;
    for (int r = 0; r < n; ++r) {
      Eigen::VectorXd row = t.vectors.row(r).transpose();
      oracle.emplace_back(t.tokens[r], cosine_oracle(row, q));
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](auto& a, auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    REQUIRE(got.size() == 12);
    for (int i = 0; i < 12; ++i) {
      CHECK(got[i].first == oracle[i].first);
      CHECK(got[i].second == Catch::Approx(oracle[i].second).margin(1e-9));
    }
  }
}

TEST_CASE("train_cbow pulls interchangeable-context words together") {
  Rng rng(3);
  auto docs = interchangeable_corpus(300, rng);
  auto table = train_cbow(docs, small_params());

  double pq = cosine(table.vec("p"), table.vec("q"));
  double rs = cosine(table.vec("r"), table.vec("s"));
  // threshold from the calibration run of this corpus construction
  CHECK(pq > 0.6);
  // words with disjoint contexts land measurably further apart
  CHECK(rs < pq);
}

TEST_CASE("train_cbow with zero epochs returns its initialization") {
  std::vector<Document> docs;
  for (int i = 0; i < 10; ++i)
    docs.push_back(doc_of({"alpha", "beta", "gamma", "alpha", "beta"}));
  CbowParams p = small_params();
  p.epochs = 0;
  p.min_count = 1;
  auto table = train_cbow(docs, p);
  REQUIRE(table.size() == 3);
  double bound = 0.5 / p.dim;
  for (int r = 0; r < table.size(); ++r) {
    REQUIRE(table.vectors.row(r).allFinite());
    for (int d = 0; d < p.dim; ++d) {
      CHECK(table.vectors(r, d) >= -bound);
      CHECK(table.vectors(r, d) <= bound);
    }
    CHECK(table.vectors.row(r).norm() <= 0.5 / std::sqrt(double(p.dim)) + 1e-12);
  }
}

TEST_CASE("train_cbow is bit-reproducible in single-threaded mode") {
  Rng rng(9);
  auto docs = interchangeable_corpus(60, rng);
  CbowParams p = small_params();
  p.epochs = 4;
  auto a = train_cbow(docs, p);
  auto b = train_cbow(docs, p);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.vectors.rows() == b.vectors.rows());
  CHECK(std::memcmp(a.vectors.data(), b.vectors.data(),
                    sizeof(double) * a.vectors.size()) == 0);
}

TEST_CASE("train_cbow input validation") {
  CHECK_THROWS_AS(train_cbow({}, small_params()), SclError);
  auto docs = std::vector<Document>{doc_of({"a", "b", "a", "b", "a", "b"})};
  CbowParams p = small_params();
  p.dim = 1;
  CHECK_THROWS_AS(train_cbow(docs, p), SclError);
  std::vector<Document> mixed = {doc_of({"a"}, Lang::Src),
                                 doc_of({"b"}, Lang::Tgt)};
  CHECK_THROWS_AS(train_cbow(mixed, small_params()), SclError);
}

TEST_CASE("embedding text format round-trips and validates") {
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / "sclom_emb_rt.txt").string();

  {  // direct parse of the documented layout
    std::ofstream out(path);
    out << "2 3\na 1 0 0\nb 0 1 0\n";
  }
  auto t = load_embeddings(path, Lang::Src);
  CHECK(t.dim == 3);
  CHECK(t.size() == 2);
  CHECK(t.find("a") == 0);
  CHECK(t.find("b") == 1);
  CHECK(t.vectors(1, 1) == 1.0);

  {  // duplicate word rejected
    std::ofstream out(path);
    out << "2 2\na 1 0\na 0 1\n";
  }
  CHECK_THROWS_AS(load_embeddings(path, Lang::Src), SclError);

  {  // row/dim mismatch rejected
    std::ofstream out(path);
    out << "2 3\na 1 0 0\nb 0 1\n";
  }
  CHECK_THROWS_AS(load_embeddings(path, Lang::Src), SclError);

  // save -> load is an exact round-trip
  Rng rng(31);
  EmbeddingTable orig;
  orig.lang = Lang::Tgt;
  orig.dim = 5;
  orig.vectors.resize(4, 5);
  for (int r = 0; r < 4; ++r) {
    orig.tokens.push_back("tok" + std::to_string(r));
    orig.index[orig.tokens.back()] = r;
    for (int d = 0; d < 5; ++d) orig.vectors(r, d) = rng.normal();
  }
  save_embeddings(orig, path);
  auto back = load_embeddings(path, Lang::Tgt);
  REQUIRE(back.size() == orig.size());
  CHECK(back.vectors == orig.vectors);

  // version-tagged artifact also loads; unknown version rejected
  save_embeddings(orig, path, /*with_version_tag=*/true);
  CHECK(load_embeddings(path, Lang::Tgt).vectors == orig.vectors);
  {
    std::ofstream out(path);
    out << "#sclom v9 embeddings\n1 2\na 1 0\n";
  }
  CHECK_THROWS_AS(load_embeddings(path, Lang::Tgt), SclError);
  std::filesystem::remove(path);
}
