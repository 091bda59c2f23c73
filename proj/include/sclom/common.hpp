// Shared utilities: error kinds, deterministic RNG, a small thread pool
// helper, and text I/O primitives used by every artifact format.
#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

namespace sclom {

// ---------------------------------------------------------------------------
// Errors. Kinds map 1:1 onto CLI exit codes (config=2, missing=3, data=4).
// ---------------------------------------------------------------------------

enum class ErrKind { Config, MissingArtifact, Data, Internal };

class SclError : public std::runtime_error {
 public:
  SclError(ErrKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) {
  throw SclError(ErrKind::Config, "config error: " + msg);
}
[[noreturn]] inline void missing_artifact(const std::string& msg) {
  throw SclError(ErrKind::MissingArtifact, "missing artifact: " + msg);
}
[[noreturn]] inline void data_error(const std::string& msg) {
  throw SclError(ErrKind::Data, "data error: " + msg);
}
[[noreturn]] inline void internal_error(const std::string& msg) {
  throw SclError(ErrKind::Internal, "internal error: " + msg);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// mappings below avoid std::*_distribution, whose output is not.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) internal_error("Rng::below(0)");
    std::uint64_t mask = ~std::uint64_t{0};
    if ((n & (n - 1)) == 0) return eng_() & (n - 1);
    std::uint64_t limit = mask - mask % n;
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= limit);
    return r % n;
  }

  // Standard normal via Box-Muller, one spare cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// parallel_for: runs fn(i) for i in [0, n). Safe when each i writes its own
// slot; results do not depend on scheduling. threads<=1 runs inline.
// ---------------------------------------------------------------------------

inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  int nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Text helpers. Doubles are serialized with shortest round-trip formatting
// so that save -> load is exact and reruns are byte-identical.
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    data_error("bad float literal '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    data_error("bad integer literal '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split_char(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) missing_artifact(path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) data_error("cannot open for writing: " + path);
  return out;
}

// Every derived artifact starts with "#sclom v1 <kind>". Loaders reject
// unknown versions or mismatched kinds. `required=false` lets a loader
// accept an external interchange file without the tag (embeddings, lexicon).
inline constexpr int kFormatVersion = 1;

inline void write_version_line(std::ostream& out, const std::string& kind) {
  out << "#sclom v" << kFormatVersion << " " << kind << "\n";
}

// Returns true if a version line was consumed. Throws on a present-but-wrong
// tag. When required and absent, throws. Tokens after the kind are optional
// `key=value` extras, returned through `extras` when requested.
inline bool check_version_line(std::istream& in, const std::string& kind,
                               bool required = true,
                               std::vector<std::string>* extras = nullptr) {
  if (in.peek() != '#') {
    if (required) data_error("missing '#sclom v" +
                             std::to_string(kFormatVersion) + " " + kind +
                             "' header line");
    return false;
  }
  std::string line;
  std::getline(in, line);
  auto fields = split_ws(line);
  if (fields.size() < 3 || fields[0] != "#sclom")
    data_error("malformed artifact header '" + line + "'");
  if (fields[1] != "v" + std::to_string(kFormatVersion))
    data_error("unsupported artifact version '" + fields[1] + "' (expected v" +
               std::to_string(kFormatVersion) + ")");
  if (fields[2] != kind)
    data_error("artifact kind mismatch: expected '" + kind + "', found '" +
               fields[2] + "'");
  if (extras) extras->assign(fields.begin() + 3, fields.end());
  return true;
}

// FNV-1a over raw bytes; used to stamp models with the projection they
// were trained against.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 1469598103934665603ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

inline std::uint64_t parse_hex64(std::string_view s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (s.empty() || s.size() > 16 || res.ec != std::errc() ||
      res.ptr != s.data() + s.size())
    data_error("invalid hex value '" + std::string(s) + "'");
  return v;
}

}  // namespace sclom
