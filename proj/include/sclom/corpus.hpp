// Document ingestion, tokenization, joint vocabulary construction and
// sparse bag-of-words vectorization over the union feature space of the
// two languages. Token strings are namespaced by language: the same string
// on both sides yields two distinct feature indices.
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "sclom/common.hpp"

namespace sclom {

enum class Lang { Src, Tgt };

inline const char* lang_name(Lang l) { return l == Lang::Src ? "src" : "tgt"; }

inline Lang parse_lang(std::string_view s) {
  if (s == "src") return Lang::Src;
  if (s == "tgt") return Lang::Tgt;
  data_error("unknown language tag '" + std::string(s) + "' (want src|tgt)");
}

struct Document {
  std::string id;
  Lang lang = Lang::Src;
  std::vector<std::string> tokens;
  std::optional<int> label;  // +1 / -1 when present
};

// ---------------------------------------------------------------------------
// Text preparation
// ---------------------------------------------------------------------------

// Joins summary and body with a single space. Either side may be empty,
// not both.
inline std::string combine_fields(const std::string& summary,
                                  const std::string& body) {
  if (summary.empty() && body.empty())
    data_error("document has empty summary and empty text");
  if (summary.empty()) return body;
  if (body.empty()) return summary;
  return summary + " " + body;
}

namespace detail {

// Bytes >= 0x80 (UTF-8 lead/continuation) count as word characters.
inline bool is_word_byte(unsigned char c) {
  return c >= 0x80 || std::isalnum(c);
}

inline bool all_ascii_punct(const std::string& tok) {
  for (unsigned char c : tok)
    if (c >= 0x80 || std::isalnum(c)) return false;
  return true;
}

inline void ascii_lower_inplace(std::string& s) {
  for (char& c : s)
    if (static_cast<unsigned char>(c) < 0x80)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace detail

// Longest single token accepted from a non-delimited language before we
// conclude the input was never segmented.
inline constexpr std::size_t kMaxSingleTokenBytes = 64;

// Lowercased unigram tokens. Source text splits on non-alphanumeric runs;
// target text must arrive pre-segmented and splits on whitespace only
// (the pipeline does not embed a segmenter). Pure-punctuation tokens are
// dropped, digits kept.
inline std::vector<std::string> tokenize(const std::string& text, Lang lang) {
  std::vector<std::string> out;
  if (lang == Lang::Src) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() &&
             !detail::is_word_byte(static_cast<unsigned char>(text[i])))
        ++i;
      std::size_t j = i;
      while (j < text.size() &&
             detail::is_word_byte(static_cast<unsigned char>(text[j])))
        ++j;
      if (j > i) {
        std::string tok = text.substr(i, j - i);
        detail::ascii_lower_inplace(tok);
        out.push_back(std::move(tok));
      }
      i = j;
    }
  } else {
    bool has_ws = text.find_first_of(" \t\r\n") != std::string::npos;
    if (!has_ws && text.size() > kMaxSingleTokenBytes)
      data_error("target text arrived unsegmented (no whitespace, " +
                 std::to_string(text.size()) + " bytes); pre-segment it");
    for (auto& tok : split_ws(text)) {
      if (detail::all_ascii_punct(tok)) continue;
      detail::ascii_lower_inplace(tok);
      out.push_back(std::move(tok));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  struct Entry {
    int index = -1;
    long total_freq = 0;
    long doc_freq = 0;
    Lang lang = Lang::Src;
  };

  // Retains tokens whose total frequency is strictly greater than
  // min_token_freq, per language. Source tokens occupy indices
  // [0, n_src), target tokens [n_src, size). Within a language the order
  // is ascending token string.
  static Vocabulary build(const std::vector<Document>& docs,
                          long min_token_freq) {
    if (docs.empty()) data_error("cannot build vocabulary from empty corpus");
    struct Counts {
      long total = 0;
      long doc = 0;
    };
    std::map<std::string, Counts> by_lang[2];
    for (const auto& doc : docs) {
      auto& m = by_lang[doc.lang == Lang::Src ? 0 : 1];
      std::unordered_map<std::string, long> in_doc;
      for (const auto& t : doc.tokens) ++in_doc[t];
      for (const auto& [tok, cnt] : in_doc) {
        auto& c = m[tok];
        c.total += cnt;
        c.doc += 1;
      }
    }
    Vocabulary v;
    for (int side = 0; side < 2; ++side) {
      Lang lang = side == 0 ? Lang::Src : Lang::Tgt;
      for (const auto& [tok, c] : by_lang[side]) {
        if (c.total <= min_token_freq) continue;
        Entry e;
        e.index = static_cast<int>(v.rows_.size());
        e.total_freq = c.total;
        e.doc_freq = c.doc;
        e.lang = lang;
        v.maps_[side].emplace(tok, e);
        v.rows_.push_back({tok, e});
      }
      if (side == 0) v.src_count_ = static_cast<int>(v.rows_.size());
    }
    if (v.rows_.empty())
      data_error("all tokens fell at or below min_token_freq=" +
                 std::to_string(min_token_freq) + "; vocabulary is empty");
    return v;
  }

  int size() const { return static_cast<int>(rows_.size()); }
  int src_count() const { return src_count_; }

  const Entry* find(Lang lang, const std::string& token) const {
    const auto& m = maps_[lang == Lang::Src ? 0 : 1];
    auto it = m.find(token);
    return it == m.end() ? nullptr : &it->second;
  }

  const std::string& token_at(int index) const { return rows_.at(index).first; }
  const Entry& entry_at(int index) const { return rows_.at(index).second; }

  // One line per token: token<TAB>lang<TAB>index<TAB>total_freq<TAB>doc_freq
  void save(const std::string& path) const {
    auto out = open_output(path);
    write_version_line(out, "vocabulary");
    for (const auto& [tok, e] : rows_) {
      out << tok << '\t' << lang_name(e.lang) << '\t' << e.index << '\t'
          << e.total_freq << '\t' << e.doc_freq << '\n';
    }
  }

  static Vocabulary load(const std::string& path) {
    auto in = open_input(path);
    check_version_line(in, "vocabulary");
    Vocabulary v;
    std::string line;
    int expect = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_char(line, '\t');
      if (f.size() != 5) data_error("bad vocabulary line: " + line);
      Entry e;
      e.lang = parse_lang(f[1]);
      e.index = static_cast<int>(parse_long(f[2]));
      e.total_freq = parse_long(f[3]);
      e.doc_freq = parse_long(f[4]);
      if (e.index != expect)
        data_error("vocabulary indices out of order at line: " + line);
      ++expect;
      v.maps_[e.lang == Lang::Src ? 0 : 1].emplace(f[0], e);
      v.rows_.push_back({f[0], e});
      if (e.lang == Lang::Src) v.src_count_ = e.index + 1;
    }
    if (v.rows_.empty()) data_error("empty vocabulary file: " + path);
    return v;
  }

 private:
  std::unordered_map<std::string, Entry> maps_[2];
  std::vector<std::pair<std::string, Entry>> rows_;
  int src_count_ = 0;
};

// ---------------------------------------------------------------------------
// Bag-of-words vectors
// ---------------------------------------------------------------------------

// Sparse unit-norm vector: raw term counts, L2-normalized. Indices are
// strictly increasing and < dim.
struct BowVector {
  std::vector<int> idx;
  std::vector<double> val;
  int dim = 0;

  bool contains(int feature) const {
    return std::binary_search(idx.begin(), idx.end(), feature);
  }
};

// Out-of-vocabulary tokens are dropped. Returns nullopt when every token
// is OOV; vectorize() turns that case into an error.
inline std::optional<BowVector> try_vectorize(const Document& doc,
                                              const Vocabulary& vocab) {
  std::map<int, double> counts;
  for (const auto& t : doc.tokens) {
    const auto* e = vocab.find(doc.lang, t);
    if (e) counts[e->index] += 1.0;
  }
  if (counts.empty()) return std::nullopt;
  BowVector v;
  v.dim = vocab.size();
  v.idx.reserve(counts.size());
  v.val.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [i, c] : counts) {
    v.idx.push_back(i);
    v.val.push_back(c);
    sq += c * c;
  }
  double inv = 1.0 / std::sqrt(sq);
  for (double& x : v.val) x *= inv;
  return v;
}

inline BowVector vectorize(const Document& doc, const Vocabulary& vocab) {
  auto v = try_vectorize(doc, vocab);
  if (!v)
    data_error("document '" + doc.id +
               "' vectorizes to the zero vector (all tokens OOV)");
  return std::move(*v);
}

// ---------------------------------------------------------------------------
// JSONL ingestion. One object per line: id (string), lang ("src"|"tgt"),
// summary (string, optional), text (string), label (+1|-1, optional).
// ---------------------------------------------------------------------------

inline Document parse_document_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    data_error(std::string("bad JSONL line: ") + e.what());
  }
  Document d;
  if (!j.contains("id") || !j["id"].is_string())
    data_error("JSONL document lacks string 'id'");
  d.id = j["id"].get<std::string>();
  if (!j.contains("lang") || !j["lang"].is_string())
    data_error("document '" + d.id + "' lacks string 'lang'");
  d.lang = parse_lang(j["lang"].get<std::string>());
  std::string summary;
  if (j.contains("summary")) {
    if (!j["summary"].is_string())
      data_error("document '" + d.id + "': 'summary' must be a string");
    summary = j["summary"].get<std::string>();
  }
  if (!j.contains("text") || !j["text"].is_string())
    data_error("document '" + d.id + "' lacks string 'text'");
  std::string body = j["text"].get<std::string>();
  d.tokens = tokenize(combine_fields(summary, body), d.lang);
  if (d.tokens.empty())
    data_error("document '" + d.id + "' has no tokens after preprocessing");
  if (j.contains("label")) {
    if (!j["label"].is_number_integer())
      data_error("document '" + d.id + "': label must be +1 or -1");
    int y = j["label"].get<int>();
    if (y != 1 && y != -1)
      data_error("document '" + d.id + "': label must be +1 or -1");
    d.label = y;
  }
  return d;
}

inline std::vector<Document> load_jsonl(const std::string& path) {
  auto in = open_input(path);
  std::vector<Document> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    docs.push_back(parse_document_json(line));
  }
  if (docs.empty()) data_error("no documents in " + path);
  return docs;
}

inline void save_jsonl(const std::vector<Document>& docs,
                       const std::string& path) {
  auto out = open_output(path);
  for (const auto& d : docs) {
    nlohmann::json j;
    j["id"] = d.id;
    j["lang"] = lang_name(d.lang);
    std::string text;
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      if (i) text += ' ';
      text += d.tokens[i];
    }
    j["text"] = text;
    if (d.label) j["label"] = *d.label;
    out << j.dump() << '\n';
  }
}

}  // namespace sclom
