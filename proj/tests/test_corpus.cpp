#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "sclom/corpus.hpp"

using namespace sclom;

namespace {

Document make_doc(std::string id, Lang lang, std::vector<std::string> tokens,
                  std::optional<int> label = std::nullopt) {
  Document d;
  d.id = std::move(id);
  d.lang = lang;
  d.tokens = std::move(tokens);
  d.label = label;
  return d;
}

// Independent dense oracle: count every vocabulary slot, normalize.
std::vector<double> dense_vectorize_oracle(const Document& doc,
                                           const Vocabulary& vocab) {
  std::vector<double> dense(vocab.size(), 0.0);
  for (const auto& t : doc.tokens) {
    const auto* e = vocab.find(doc.lang, t);
    if (e) dense[e->index] += 1.0;
  }
  double sq = 0.0;
  for (double v : dense) sq += v * v;
  if (sq > 0) {
    double inv = 1.0 / std::sqrt(sq);
    for (double& v : dense) v *= inv;
  }
  return dense;
}

}  // namespace

TEST_CASE("combine_fields joins with one separator") {
  CHECK(combine_fields("great book", "loved it") == "great book loved it");
  CHECK(combine_fields("", "loved it") == "loved it");
  CHECK(combine_fields("great", "") == "great");
  CHECK_THROWS_AS(combine_fields("", ""), SclError);
}

TEST_CASE("tokenize lowercases and splits source text") {
  CHECK(tokenize("Great Book!", Lang::Src) ==
        std::vector<std::string>{"great", "book"});
  CHECK(tokenize("a  b", Lang::Src) == std::vector<std::string>{"a", "b"});
  CHECK(tokenize("it's 42 pages?!", Lang::Src) ==
        std::vector<std::string>{"it", "s", "42", "pages"});
}

TEST_CASE("tokenize splits pre-segmented target text on whitespace") {
  CHECK(tokenize("\xe6\xa3\x92 \xe6\x9e\x81\xe4\xba\x86", Lang::Tgt) ==
        std::vector<std::string>{"\xe6\xa3\x92", "\xe6\x9e\x81\xe4\xba\x86"});
  // punctuation-only tokens dropped
  CHECK(tokenize("\xe6\xa3\x92 , \xe6\x9e\x81\xe4\xba\x86", Lang::Tgt).size() == 2);
}

TEST_CASE("tokenize rejects long unsegmented target text") {
  std::string blob;
  for (int i = 0; i < 40; ++i) blob += "\xe6\xa3\x92";  // 120 bytes, no spaces
  CHECK_THROWS_AS(tokenize(blob, Lang::Tgt), SclError);
  // short single token is fine
  CHECK(tokenize("\xe6\xa3\x92", Lang::Tgt).size() == 1);
}

TEST_CASE("build_vocabulary applies a strict frequency threshold") {
  std::vector<Document> docs;
  // "good" 6 times, "meh" 5 times
  for (int i = 0; i < 6; ++i)
    docs.push_back(make_doc("g" + std::to_string(i), Lang::Src, {"good"}));
  for (int i = 0; i < 5; ++i)
    docs.push_back(make_doc("m" + std::to_string(i), Lang::Src, {"meh"}));
  auto vocab = Vocabulary::build(docs, 5);
  CHECK(vocab.find(Lang::Src, "good") != nullptr);
  CHECK(vocab.find(Lang::Src, "meh") == nullptr);
  CHECK(vocab.size() == 1);
}

TEST_CASE("doc_freq counts documents, not occurrences") {
  std::vector<Document> docs;
  docs.push_back(make_doc("a", Lang::Src, {"w", "w", "w", "w", "w", "w", "w"}));
  auto vocab = Vocabulary::build(docs, 5);
  const auto* e = vocab.find(Lang::Src, "w");
  REQUIRE(e != nullptr);
  CHECK(e->total_freq == 7);
  CHECK(e->doc_freq == 1);
}

TEST_CASE("build_vocabulary matches brute-force scan on a random corpus") {
  Rng rng(11);
  std::vector<std::string> pool;
  for (int i = 0; i < 12; ++i) pool.push_back("tok" + std::to_string(i));
  std::vector<Document> docs;
  for (int d = 0; d < 50; ++d) {
    std::vector<std::string> toks;
    int len = 3 + static_cast<int>(rng.below(8));
    for (int t = 0; t < len; ++t)
      toks.push_back(pool[rng.below(pool.size())]);
    docs.push_back(make_doc("d" + std::to_string(d),
                            d % 3 == 0 ? Lang::Tgt : Lang::Src, toks));
  }
  long min_freq = 4;
  auto vocab = Vocabulary::build(docs, min_freq);

  // brute force per-language counts
  for (int side = 0; side < 2; ++side) {
    Lang lang = side == 0 ? Lang::Src : Lang::Tgt;
    for (const auto& tok : pool) {
      long total = 0, docf = 0;
      for (const auto& doc : docs) {
        if (doc.lang != lang) continue;
        long c = std::count(doc.tokens.begin(), doc.tokens.end(), tok);
        total += c;
        if (c > 0) ++docf;
      }
      const auto* e = vocab.find(lang, tok);
      if (total > min_freq) {
        REQUIRE(e != nullptr);
        CHECK(e->total_freq == total);
        CHECK(e->doc_freq == docf);
      } else {
        CHECK(e == nullptr);
      }
    }
  }
}

TEST_CASE("vocabulary errors") {
  CHECK_THROWS_AS(Vocabulary::build({}, 5), SclError);
  std::vector<Document> docs{make_doc("a", Lang::Src, {"rare"})};
  CHECK_THROWS_AS(Vocabulary::build(docs, 5), SclError);
}

TEST_CASE("language namespacing gives distinct indices to a shared string") {
  std::vector<Document> docs;
  for (int i = 0; i < 7; ++i) {
    docs.push_back(make_doc("s" + std::to_string(i), Lang::Src, {"ok"}));
    docs.push_back(make_doc("t" + std::to_string(i), Lang::Tgt, {"ok"}));
  }
  auto vocab = Vocabulary::build(docs, 5);
  const auto* s = vocab.find(Lang::Src, "ok");
  const auto* t = vocab.find(Lang::Tgt, "ok");
  REQUIRE(s != nullptr);
  REQUIRE(t != nullptr);
  CHECK(s->index != t->index);
  CHECK(s->index < vocab.src_count());
  CHECK(t->index >= vocab.src_count());
}

TEST_CASE("vectorize counts then L2-normalizes") {
  std::vector<Document> corpus;
  for (int i = 0; i < 6; ++i)
    corpus.push_back(make_doc("c" + std::to_string(i), Lang::Src, {"a", "b"}));
  auto vocab = Vocabulary::build(corpus, 5);
  REQUIRE(vocab.size() == 2);
  int ia = vocab.find(Lang::Src, "a")->index;
  int ib = vocab.find(Lang::Src, "b")->index;

  auto v = vectorize(make_doc("x", Lang::Src, {"a", "a", "b"}), vocab);
  REQUIRE(v.idx.size() == 2);
  double s5 = std::sqrt(5.0);
  CHECK(v.idx[0] == std::min(ia, ib));
  CHECK(v.val[ia < ib ? 0 : 1] == Catch::Approx(2.0 / s5).epsilon(1e-12));
  CHECK(v.val[ia < ib ? 1 : 0] == Catch::Approx(1.0 / s5).epsilon(1e-12));

  auto single = vectorize(make_doc("y", Lang::Src, {"a"}), vocab);
  REQUIRE(single.idx.size() == 1);
  CHECK(single.val[0] == 1.0);

  CHECK_THROWS_AS(vectorize(make_doc("z", Lang::Src, {"oov"}), vocab),
                  SclError);
}

TEST_CASE("vectorize equals the dense oracle on random documents") {
  Rng rng(7);
  std::vector<std::string> pool;
  for (int i = 0; i < 9; ++i) pool.push_back("w" + std::to_string(i));
  std::vector<Document> corpus;
  for (int d = 0; d < 40; ++d) {
    std::vector<std::string> toks;
    for (int t = 0; t < 12; ++t) toks.push_back(pool[rng.below(pool.size())]);
    corpus.push_back(make_doc("c" + std::to_string(d), Lang::Src, toks));
  }
  auto vocab = Vocabulary::build(corpus, 5);
  REQUIRE(vocab.size() > 0);

  for (int d = 0; d < 20; ++d) {
    std::vector<std::string> toks;
    for (int t = 0; t < 10; ++t) toks.push_back(pool[rng.below(pool.size())]);
    Document doc = make_doc("q" + std::to_string(d), Lang::Src, toks);
    auto dense = dense_vectorize_oracle(doc, vocab);
    auto sparse = try_vectorize(doc, vocab);
    REQUIRE(sparse.has_value());
    std::vector<double> expanded(vocab.size(), 0.0);
    for (std::size_t i = 0; i < sparse->idx.size(); ++i)
      expanded[sparse->idx[i]] = sparse->val[i];
    for (int i = 0; i < vocab.size(); ++i)
      CHECK(expanded[i] == Catch::Approx(dense[i]).margin(1e-12));
  }
}

TEST_CASE("BowVector invariants: unit norm, strictly ascending indices") {
  Rng rng(23);
  std::vector<std::string> pool;
  for (int i = 0; i < 15; ++i) pool.push_back("p" + std::to_string(i));
  std::vector<Document> corpus;
  for (int d = 0; d < 60; ++d) {
    std::vector<std::string> toks;
    for (int t = 0; t < 8; ++t) toks.push_back(pool[rng.below(pool.size())]);
    corpus.push_back(make_doc("c" + std::to_string(d),
                              d % 2 ? Lang::Src : Lang::Tgt, toks));
  }
  auto vocab = Vocabulary::build(corpus, 5);
  for (const auto& doc : corpus) {
    auto v = try_vectorize(doc, vocab);
    if (!v) continue;
    double sq = 0.0;
    for (std::size_t i = 0; i < v->idx.size(); ++i) {
      if (i > 0) CHECK(v->idx[i] > v->idx[i - 1]);
      CHECK(v->idx[i] < v->dim);
      CHECK(v->val[i] > 0.0);
      sq += v->val[i] * v->val[i];
    }
    CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-9);
  }
}

TEST_CASE("vocabulary round-trips through its text format") {
  std::vector<Document> docs;
  for (int i = 0; i < 8; ++i) {
    docs.push_back(make_doc("s" + std::to_string(i), Lang::Src,
                            {"alpha", "beta", "beta"}));
    docs.push_back(make_doc("t" + std::to_string(i), Lang::Tgt, {"gamma"}));
  }
  auto vocab = Vocabulary::build(docs, 5);
  auto path = std::filesystem::temp_directory_path() / "sclom_vocab_rt.tsv";
  vocab.save(path.string());
  auto loaded = Vocabulary::load(path.string());
  REQUIRE(loaded.size() == vocab.size());
  CHECK(loaded.src_count() == vocab.src_count());
  for (int i = 0; i < vocab.size(); ++i) {
    CHECK(loaded.token_at(i) == vocab.token_at(i));
    CHECK(loaded.entry_at(i).index == vocab.entry_at(i).index);
    CHECK(loaded.entry_at(i).total_freq == vocab.entry_at(i).total_freq);
    CHECK(loaded.entry_at(i).doc_freq == vocab.entry_at(i).doc_freq);
    CHECK(loaded.entry_at(i).lang == vocab.entry_at(i).lang);
  }
  std::filesystem::remove(path);
}

TEST_CASE("JSONL parsing honors field contract") {
  auto d = parse_document_json(
      R"({"id":"r1","lang":"src","summary":"Great","text":"loved it","label":1})");
  CHECK(d.id == "r1");
  CHECK(d.lang == Lang::Src);
  CHECK(d.tokens == std::vector<std::string>{"great", "loved", "it"});
  REQUIRE(d.label.has_value());
  CHECK(*d.label == 1);

  auto u = parse_document_json(R"({"id":"r2","lang":"tgt","text":"ok fine"})");
  CHECK_FALSE(u.label.has_value());

  CHECK_THROWS_AS(parse_document_json(R"({"id":"x","lang":"src","text":""})"),
                  SclError);
  CHECK_THROWS_AS(
      parse_document_json(R"({"id":"x","lang":"src","text":"a","label":2})"),
      SclError);
  CHECK_THROWS_AS(parse_document_json(R"({"lang":"src","text":"a"})"),
                  SclError);
  CHECK_THROWS_AS(parse_document_json("not json"), SclError);
}
