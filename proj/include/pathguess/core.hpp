#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathguess {

/// Symbols are dense integer ids. For count-valued processes the id is the
/// count itself; for labelled finite alphabets an optional label table maps
/// ids back to names (reporting only, never used in computation).
using symbol_t = std::uint32_t;

/// Values of a pattern over an implied sorted index support. Two patterns on
/// the same support compare lexicographically (support position first, then
/// symbol id), which is exactly std::vector's operator<.
using pattern_t = std::vector<symbol_t>;

using sample_t = std::vector<symbol_t>;

struct Alphabet {
  std::uint32_t size = 0;  // meaningful only when !unbounded
  bool unbounded = false;
  std::vector<std::string> labels;  // optional, reporting only

  bool contains(symbol_t a) const { return unbounded || a < size; }
};

/// Data set D and guess set G after normalization (min(D∪G) = 1), together
/// with the layout constants everything downstream depends on:
///   span    L = diam(D∪G) = max - min + 1
///   symbols K = |D| + |G|
/// `offset` records the shift applied, so callers can report positions in the
/// user's original coordinates.
struct IndexPair {
  std::vector<int> data;    // D, sorted, may be empty
  std::vector<int> guess;   // G, sorted, never empty
  std::vector<int> joint;   // D ∪ G, sorted
  int span = 0;             // L
  int symbols = 0;          // K
  long long offset = 0;     // shift applied by normalization
};

namespace detail {

inline std::vector<int> sorted_unique(std::vector<int> v, const char* what) {
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
    throw std::invalid_argument(std::string(what) + " contains duplicate indices");
  }
  return v;
}

}  // namespace detail

inline IndexPair normalize_index_pair(std::vector<int> D, std::vector<int> G) {
  if (G.empty()) throw std::invalid_argument("guess set G must be non-empty");
  IndexPair p;
  p.data = detail::sorted_unique(std::move(D), "data set D");
  p.guess = detail::sorted_unique(std::move(G), "guess set G");
  p.joint.reserve(p.data.size() + p.guess.size());
  std::set_union(p.data.begin(), p.data.end(), p.guess.begin(), p.guess.end(),
                 std::back_inserter(p.joint));
  if (p.joint.size() != p.data.size() + p.guess.size()) {
    throw std::invalid_argument("data set D and guess set G must be disjoint");
  }
  const long long shift = 1LL - p.joint.front();
  for (auto* v : {&p.data, &p.guess, &p.joint}) {
    for (int& i : *v) i = static_cast<int>(i + shift);
  }
  p.offset = -shift;
  p.span = p.joint.back();  // min is 1 after the shift
  p.symbols = static_cast<int>(p.joint.size());
  return p;
}

/// Number of shifts i >= 0 with theta^i(D∪G) fully inside [1, n]:
/// max(0, n - L + 1). This is the exact window count; the DKW statistic in
/// the analysis module uses its own n - k + 2 normalizer instead.
inline long long window_count(long long n, const IndexPair& pair) {
  if (n < 1) throw std::invalid_argument("sample length must be >= 1");
  return std::max<long long>(0, n - pair.span + 1);
}

/// Sorted-unique index set shifted so its minimum is 1. Stationarity makes
/// the absolute placement irrelevant for laws and deviation statistics.
inline std::vector<int> normalize_positions(std::vector<int> S) {
  if (S.empty()) throw std::invalid_argument("index set must be non-empty");
  S = detail::sorted_unique(std::move(S), "index set");
  const int shift = 1 - S.front();
  for (int& i : S) i += shift;
  return S;
}

/// Lexicographic successor of a length-|p| pattern over symbols {0..A-1}.
/// Returns false (and resets to all zeros) after the last pattern. The empty
/// pattern enumerates exactly once.
inline bool next_pattern(pattern_t& p, std::uint32_t alphabet) {
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] + 1 < alphabet) {
      ++p[i];
      std::fill(p.begin() + static_cast<std::ptrdiff_t>(i) + 1, p.end(), 0);
      return true;
    }
  }
  std::fill(p.begin(), p.end(), 0);
  return false;
}

/// A^k as size_t with overflow guard; used for enumeration budget checks.
inline std::size_t checked_pow(std::uint32_t base, std::size_t exp, std::size_t budget) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > budget / base) return budget + 1;
    r *= base;
  }
  return r;
}

}  // namespace pathguess
