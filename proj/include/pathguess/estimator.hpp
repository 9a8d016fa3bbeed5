#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>

#include "pathguess/core.hpp"
#include "pathguess/parallel.hpp"

namespace pathguess {

/// Sliding-window pattern-pair counts N(b,a) and N(b). Only observed patterns
/// are stored, so unbounded alphabets never materialize A^G.
struct CountTable {
  IndexPair pair;
  std::map<pattern_t, std::map<pattern_t, std::int64_t>> joint;  // b -> a -> N(b,a)
  std::map<pattern_t, std::int64_t> data_marginal;               // b -> N(b)
  std::int64_t windows = 0;
};

namespace detail {

inline void count_shift_range(const sample_t& sample, const IndexPair& pair,
                              long long first, long long last, CountTable& out) {
  pattern_t b(pair.data.size()), a(pair.guess.size());
  for (long long i = first; i < last; ++i) {
    for (std::size_t j = 0; j < pair.data.size(); ++j) {
      b[j] = sample[static_cast<std::size_t>(pair.data[j] - 1 + i)];
    }
    for (std::size_t j = 0; j < pair.guess.size(); ++j) {
      a[j] = sample[static_cast<std::size_t>(pair.guess[j] - 1 + i)];
    }
    auto bi = out.joint.find(b);
    if (bi == out.joint.end()) bi = out.joint.emplace(b, std::map<pattern_t, std::int64_t>{}).first;
    auto ai = bi->second.find(a);
    if (ai == bi->second.end()) ai = bi->second.emplace(a, 0).first;
    ++ai->second;
    auto mi = out.data_marginal.find(b);
    if (mi == out.data_marginal.end()) mi = out.data_marginal.emplace(b, 0).first;
    ++mi->second;
  }
}

}  // namespace detail

/// One pass over the shifts i in [0, n-L]; O(n K) time.
inline CountTable count_patterns(const sample_t& sample, const IndexPair& pair) {
  CountTable t;
  t.pair = pair;
  if (sample.empty()) throw std::invalid_argument("count_patterns: empty sample");
  t.windows = window_count(static_cast<long long>(sample.size()), pair);
  detail::count_shift_range(sample, pair, 0, t.windows, t);
  return t;
}

/// Associative, commutative merge of tables counted over disjoint shift
/// ranges; sharded counting therefore gives the same table as a single pass.
inline void merge_counts(CountTable& into, const CountTable& from) {
  if (into.pair.data != from.pair.data || into.pair.guess != from.pair.guess) {
    throw std::invalid_argument("merge_counts: index pairs differ");
  }
  into.windows += from.windows;
  for (const auto& [b, amap] : from.joint) {
    auto& dst = into.joint[b];
    for (const auto& [a, c] : amap) dst[a] += c;
  }
  for (const auto& [b, c] : from.data_marginal) into.data_marginal[b] += c;
}

inline CountTable count_patterns_parallel(const sample_t& sample, const IndexPair& pair,
                                          std::size_t threads = 0) {
  if (sample.empty()) throw std::invalid_argument("count_patterns: empty sample");
  const long long windows = window_count(static_cast<long long>(sample.size()), pair);
  const std::size_t workers =
      std::min<std::size_t>(effective_threads(threads), windows > 0 ? static_cast<std::size_t>(windows) : 1);
  if (workers <= 1) return count_patterns(sample, pair);
  std::vector<CountTable> shards(workers);
  parallel_for(workers, workers, [&](std::size_t w) {
    shards[w].pair = pair;
    const long long lo = windows * static_cast<long long>(w) / static_cast<long long>(workers);
    const long long hi = windows * static_cast<long long>(w + 1) / static_cast<long long>(workers);
    shards[w].windows = hi - lo;
    detail::count_shift_range(sample, pair, lo, hi, shards[w]);
  });
  CountTable out = std::move(shards.front());
  for (std::size_t w = 1; w < workers; ++w) merge_counts(out, shards[w]);
  return out;
}

/// The fitted guessing function b -> argmax_a N(b,a), with deterministic
/// tie-breaking (lexicographically smallest maximizer) and a total-function
/// fallback for data patterns never observed in training (the globally most
/// frequent guess pattern).
struct GuessRule {
  IndexPair pair;
  std::map<pattern_t, pattern_t> table;
  pattern_t fallback;
  std::set<pattern_t> tie_broken;
};

inline GuessRule fit_guess_rule(const CountTable& counts) {
  if (counts.windows <= 0) throw std::invalid_argument("fit_guess_rule: no training windows");
  GuessRule rule;
  rule.pair = counts.pair;
  std::map<pattern_t, std::int64_t> column;
  for (const auto& [b, amap] : counts.joint) {
    std::int64_t best = -1;
    const pattern_t* arg = nullptr;
    bool tie = false;
    for (const auto& [a, c] : amap) {
      column[a] += c;
      if (c > best) {
        best = c;
        arg = &a;
        tie = false;
      } else if (c == best) {
        tie = true;  // later in map order, so lexicographically larger
      }
    }
    rule.table.emplace(b, *arg);
    if (tie) rule.tie_broken.insert(b);
  }
  std::int64_t best = -1;
  for (const auto& [a, c] : column) {
    if (c > best) {
      best = c;
      rule.fallback = a;
    }
  }
  return rule;
}

inline const pattern_t& guess(const GuessRule& rule, const pattern_t& b) {
  if (b.size() != rule.pair.data.size()) {
    throw std::invalid_argument("guess: pattern support does not match the rule's data set");
  }
  auto it = rule.table.find(b);
  return it == rule.table.end() ? rule.fallback : it->second;
}

}  // namespace pathguess
