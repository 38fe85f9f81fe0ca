// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QAPROBE_TEXT_HPP_
#define QAPROBE_TEXT_HPP_

// Text primitives shared by every module: UTF-8 <-> code point conversion,
// CPython-compatible character classes and lowercasing (the evaluator must
// reproduce the reference Python pipeline bit for bit), whitespace
// tokenization over code points, the rule-based sentence splitter, SHA-256
// for paragraph content keys, and the deterministic RNG used by all seeded
// transforms.

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace qaprobe {

namespace detail {

struct CpPair {
  char32_t from;
  char32_t to;
};
struct CpExpansion {
  char32_t from;
  char32_t to[3];
  int len;
};
struct CpRange {
  char32_t lo;
  char32_t hi;
};

#include "detail/unicode_tables.inc"

inline bool in_ranges(const CpRange* ranges, std::size_t n, char32_t c) {
  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (c < ranges[mid].lo) {
      hi = mid;
    } else if (c > ranges[mid].hi) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace detail

// --- code point classification, matching CPython's str methods ---

inline bool is_py_space(char32_t c) {
  return detail::in_ranges(detail::kSpaceRanges, detail::kSpaceRanges_count, c);
}
inline bool is_word_char(char32_t c) {  // Python re \w under re.UNICODE
  return detail::in_ranges(detail::kWordRanges, detail::kWordRanges_count, c);
}
inline bool is_upper_cp(char32_t c) {
  return detail::in_ranges(detail::kUpperRanges, detail::kUpperRanges_count, c);
}
inline bool is_alpha_cp(char32_t c) {
  return detail::in_ranges(detail::kAlphaRanges, detail::kAlphaRanges_count, c);
}
inline bool is_cased_cp(char32_t c) {
  return detail::in_ranges(detail::kCasedRanges, detail::kCasedRanges_count, c);
}
inline bool is_case_ignorable_cp(char32_t c) {
  return detail::in_ranges(detail::kCaseIgnorableRanges,
                           detail::kCaseIgnorableRanges_count, c);
}
inline bool is_ascii_punct(char32_t c) {  // Python string.punctuation
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}
inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// --- UTF-8 ---

// Invalid byte sequences decode to U+FFFD one byte at a time; converter
// inputs are not always clean UTF-8 and loading is permissive.
inline std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
      min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
      min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
      min_cp = 0x10000;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      unsigned char b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string utf8_encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) utf8_append(out, cp);
  return out;
}

inline std::size_t cp_length(std::string_view utf8) {
  std::size_t count = 0, i = 0;
  while (i < utf8.size()) {
    unsigned char b = static_cast<unsigned char>(utf8[i]);
    if ((b & 0xC0) != 0x80) ++count;
    ++i;
  }
  return count;
}

// --- lowercasing, mirroring CPython str.lower() including Final_Sigma ---

namespace detail {

inline char32_t lower_1to1(char32_t c) {
  std::size_t lo = 0, hi = kLowerPairs_count;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (c < kLowerPairs[mid].from) {
      hi = mid;
    } else if (c > kLowerPairs[mid].from) {
      lo = mid + 1;
    } else {
      return kLowerPairs[mid].to;
    }
  }
  return c;
}

inline bool sigma_is_final(std::u32string_view s, std::size_t i) {
  std::size_t j = i;
  while (j > 0 && is_case_ignorable_cp(s[j - 1])) --j;
  if (j == 0 || !is_cased_cp(s[j - 1])) return false;
  std::size_t k = i + 1;
  while (k < s.size() && is_case_ignorable_cp(s[k])) ++k;
  return k == s.size() || !is_cased_cp(s[k]);
}

}  // namespace detail

inline std::u32string py_lower(std::u32string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char32_t c = s[i];
    if (c == 0x03A3) {  // capital sigma, context sensitive
      out.push_back(detail::sigma_is_final(s, i) ? 0x03C2 : 0x03C3);
      continue;
    }
    bool multi = false;
    for (std::size_t m = 0; m < detail::kLowerMulti_count; ++m) {
      if (detail::kLowerMulti[m].from == c) {
        for (int k = 0; k < detail::kLowerMulti[m].len; ++k)
          out.push_back(detail::kLowerMulti[m].to[k]);
        multi = true;
        break;
      }
    }
    if (!multi) out.push_back(detail::lower_1to1(c));
  }
  return out;
}

// --- whitespace tokenization over code points ---

struct CpSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open
  std::size_t size() const { return end - begin; }
};

inline std::vector<CpSpan> ws_tokens(std::u32string_view s) {
  std::vector<CpSpan> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_py_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::size_t b = i;
    while (i < s.size() && !is_py_space(s[i])) ++i;
    out.push_back({b, i});
  }
  return out;
}

inline std::size_t ws_token_count(std::string_view utf8) {
  return ws_tokens(utf8_decode(utf8)).size();
}

// Trims edge characters from a token span: leading/trailing ASCII punctuation
// plus curly quotes. Used when a token like "Rollo," has to be matched or
// labeled by its core word.
inline CpSpan strip_edge_punct(std::u32string_view s, CpSpan t) {
  auto is_edge = [](char32_t c) {
    return is_ascii_punct(c) || c == 0x2018 || c == 0x2019 || c == 0x201C ||
           c == 0x201D;
  };
  while (t.begin < t.end && is_edge(s[t.begin])) ++t.begin;
  while (t.end > t.begin && is_edge(s[t.end - 1])) --t.end;
  return t;
}

// --- sentence splitting ---
//
// Default rule: a sentence ends at '.', '!' or '?' when followed by
// whitespace and then an uppercase letter. Periods are suppressed when the
// preceding token looks like an abbreviation: it is on the stop list, it is a
// single capital initial ("F."), or it contains an interior period ("U.S.",
// "i.e."). The splitter is pluggable; this is only the default.

using SentenceSplitFn = std::function<std::vector<std::size_t>(const std::u32string&)>;

namespace detail {

inline const std::vector<std::u32string>& abbrev_stop_list() {
  static const std::vector<std::u32string> kList = {
      U"Mr",   U"Mrs",  U"Ms",   U"Dr",   U"Prof", U"St",   U"Jr",   U"Sr",
      U"vs",   U"etc",  U"al",   U"Inc",  U"Ltd",  U"Co",   U"Corp", U"Gen",
      U"Col",  U"Capt", U"Lt",   U"Sgt",  U"Maj",  U"Rev",  U"Hon",  U"Gov",
      U"Sen",  U"Rep",  U"Mt",   U"Ft",   U"Jan",  U"Feb",  U"Mar",  U"Apr",
      U"Jun",  U"Jul",  U"Aug",  U"Sep",  U"Sept", U"Oct",  U"Nov",  U"Dec",
      U"Mon",  U"Tue",  U"Tues", U"Wed",  U"Thu",  U"Thurs", U"Fri", U"Sat",
      U"Sun",  U"approx", U"dept", U"Dept", U"Univ", U"Ave", U"Blvd", U"Rd"};
  return kList;
}

inline bool is_abbrev_token(std::u32string_view token_with_dot) {
  // token_with_dot ends at the candidate period, period included.
  std::size_t b = 0;
  while (b < token_with_dot.size() && !is_word_char(token_with_dot[b])) ++b;
  if (b + 1 >= token_with_dot.size()) return false;  // bare punctuation
  std::u32string_view core = token_with_dot.substr(b, token_with_dot.size() - b - 1);
  for (char32_t c : core)
    if (c == U'.') return true;  // interior period: U.S., i.e., e.g.
  if (core.size() == 1 && is_upper_cp(core[0])) return true;  // initial
  for (const auto& a : abbrev_stop_list())
    if (core == a) return true;
  return false;
}

}  // namespace detail

// Returns the code point positions where a new sentence starts (excluding 0),
// strictly increasing.
inline std::vector<std::size_t> sentence_cuts(const std::u32string& s) {
  std::vector<std::size_t> cuts;
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    char32_t c = s[i];
    if (c != U'.' && c != U'!' && c != U'?') continue;
    if (i + 1 < n && (s[i + 1] == U'.' || s[i + 1] == U'!' || s[i + 1] == U'?'))
      continue;  // decide at the last terminal of a run
    std::size_t j = i + 1;
    if (j >= n) break;
    if (!is_py_space(s[j])) continue;
    std::size_t k = j;
    while (k < n && is_py_space(s[k])) ++k;
    if (k >= n) break;
    if (!is_upper_cp(s[k])) continue;
    if (c == U'.') {
      std::size_t t = i;
      while (t > 0 && !is_py_space(s[t - 1])) --t;
      if (detail::is_abbrev_token(std::u32string_view(s).substr(t, i - t + 1)))
        continue;
    }
    cuts.push_back(k);
  }
  return cuts;
}

inline SentenceSplitFn default_sentence_splitter() {
  return [](const std::u32string& s) { return sentence_cuts(s); };
}

// --- SHA-256 (paragraph content keys) ---

namespace detail {

class Sha256 {
 public:
  Sha256() { reset(); }

  void reset() {
    static constexpr std::uint32_t kInit[8] = {
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
        0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::memcpy(state_, kInit, sizeof(state_));
    bit_len_ = 0;
    buf_len_ = 0;
  }

  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bit_len_ += static_cast<std::uint64_t>(len) * 8;
    while (len > 0) {
      std::size_t take = std::min<std::size_t>(64 - buf_len_, len);
      std::memcpy(buf_ + buf_len_, p, take);
      buf_len_ += take;
      p += take;
      len -= take;
      if (buf_len_ == 64) {
        compress(buf_);
        buf_len_ = 0;
      }
    }
  }

  std::array<std::uint8_t, 32> digest() {
    const std::uint64_t bits = bit_len_;  // message length before padding
    std::uint8_t pad = 0x80;
    update(&pad, 1);
    std::uint8_t zero = 0;
    while (buf_len_ != 56) update(&zero, 1);
    std::uint8_t len_be[8];
    for (int i = 0; i < 8; ++i)
      len_be[i] = static_cast<std::uint8_t>(bits >> (56 - 8 * i));
    update(len_be, 8);
    std::array<std::uint8_t, 32> out{};
    for (int i = 0; i < 8; ++i) {
      out[4 * i + 0] = static_cast<std::uint8_t>(state_[i] >> 24);
      out[4 * i + 1] = static_cast<std::uint8_t>(state_[i] >> 16);
      out[4 * i + 2] = static_cast<std::uint8_t>(state_[i] >> 8);
      out[4 * i + 3] = static_cast<std::uint8_t>(state_[i]);
    }
    return out;
  }

 private:
  static std::uint32_t rotr(std::uint32_t x, int n) {
    return (x >> n) | (x << (32 - n));
  }

  void compress(const std::uint8_t* block) {
    static constexpr std::uint32_t K[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
        0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
        0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
        0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
        0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
        0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = (std::uint32_t(block[4 * i]) << 24) |
             (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) |
             std::uint32_t(block[4 * i + 3]);
    }
    for (int i = 16; i < 64; ++i) {
      std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
    std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
    for (int i = 0; i < 64; ++i) {
      std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      std::uint32_t ch = (e & f) ^ (~e & g);
      std::uint32_t t1 = h + s1 + ch + K[i] + w[i];
      std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      std::uint32_t t2 = s0 + maj;
      h = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    state_[0] += a;
    state_[1] += b;
    state_[2] += c;
    state_[3] += d;
    state_[4] += e;
    state_[5] += f;
    state_[6] += g;
    state_[7] += h;
  }

  std::uint32_t state_[8];
  std::uint64_t bit_len_;
  std::size_t buf_len_;
  std::uint8_t buf_[64];
};

}  // namespace detail

inline std::string sha256_hex(std::string_view data) {
  detail::Sha256 h;
  h.update(data.data(), data.size());
  auto d = h.digest();
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint8_t b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

// --- deterministic RNG ---
//
// Per-example randomness is a pure function of (master seed, stable id), so
// transform results do not depend on iteration order or thread count.

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view id) {
  std::uint64_t z = detail::mix64(master + 0x9E3779B97F4A7C15ULL);
  return detail::mix64(z ^ fnv1a64(id));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  // Uniform draw in [0, n); n must be >= 1. Multiply-shift keeps the draw
  // independent of any standard library distribution implementation.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// --- bounded parallel loop with deterministic output slots ---

inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  std::size_t chunk = (n + t - 1) / t;
  for (std::size_t w = 0; w < t; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qaprobe

#endif  // QAPROBE_TEXT_HPP_
