#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathguess/estimator.hpp"
#include "pathguess/models.hpp"
#include "pathguess/parallel.hpp"
#include "pathguess/rng.hpp"
#include "pathguess/sampler.hpp"

namespace pathguess {

namespace detail {

/// Mass threshold below which data patterns are dropped from suprema when a
/// law is a truncated view of an unbounded-alphabet process.
inline constexpr double kTruncatedSupportFloor = 1e-12;

/// Splits joint patterns on D ∪ G into their (b, a) parts and back.
struct PairSplitter {
  std::vector<std::size_t> data_slots;   // index into joint pattern per D position
  std::vector<std::size_t> guess_slots;  // index into joint pattern per G position

  PairSplitter(const IndexPair& pair, const ExactLaw& law) {
    if (law.positions != pair.joint) {
      throw std::invalid_argument("law support does not cover D ∪ G");
    }
    for (int p : pair.data) data_slots.push_back(slot(law, p));
    for (int p : pair.guess) guess_slots.push_back(slot(law, p));
  }

  static std::size_t slot(const ExactLaw& law, int pos) {
    auto it = std::find(law.positions.begin(), law.positions.end(), pos);
    return static_cast<std::size_t>(it - law.positions.begin());
  }

  void assemble(const pattern_t& b, const pattern_t& a, pattern_t& joint) const {
    for (std::size_t i = 0; i < data_slots.size(); ++i) joint[data_slots[i]] = b[i];
    for (std::size_t i = 0; i < guess_slots.size(); ++i) joint[guess_slots[i]] = a[i];
  }
};

/// Enumerates the data patterns relevant to a law: all of A^D when the law is
/// exhaustive, otherwise the observed b with mass above the support floor.
inline std::vector<pattern_t> data_patterns(const ExactLaw& law, const IndexPair& pair,
                                            const PairSplitter& split) {
  std::vector<pattern_t> out;
  if (law.exhaustive) {
    pattern_t b(pair.data.size(), 0);
    do {
      out.push_back(b);
    } while (next_pattern(b, law.alphabet));
    return out;
  }
  std::map<pattern_t, double> weight;
  pattern_t b(pair.data.size());
  for (const auto& [pat, p] : law.probs) {
    for (std::size_t i = 0; i < split.data_slots.size(); ++i) b[i] = pat[split.data_slots[i]];
    weight[b] += p;
  }
  for (const auto& [pat, w] : weight) {
    if (w >= kTruncatedSupportFloor) out.push_back(pat);
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Margin, gap and excess risk
// ---------------------------------------------------------------------------

struct MarginReport {
  double delta = 0.0;
  std::map<pattern_t, double> per_b;
};

/// Margin delta_{D,G}: per data pattern b, the smallest strictly positive
/// regret gap max_a P(a,b) - P(c,b) over guesses c (0 when none is positive),
/// then the infimum over b.
inline MarginReport margin_delta(const ExactLaw& law, const IndexPair& pair) {
  const detail::PairSplitter split(pair, law);
  MarginReport rep;
  rep.delta = std::numeric_limits<double>::infinity();
  pattern_t joint(law.positions.size());
  for (const pattern_t& b : detail::data_patterns(law, pair, split)) {
    double best = 0.0;
    std::vector<double> masses;
    pattern_t a(pair.guess.size(), 0);
    do {
      split.assemble(b, a, joint);
      const double m = law.mass(joint);
      masses.push_back(m);
      best = std::max(best, m);
    } while (next_pattern(a, law.alphabet));
    double gap = std::numeric_limits<double>::infinity();
    for (double m : masses) {
      const double g = best - m;
      if (g > 0.0) gap = std::min(gap, g);
    }
    const double db = std::isfinite(gap) ? gap : 0.0;
    rep.per_b.emplace(b, db);
    rep.delta = std::min(rep.delta, db);
  }
  if (!std::isfinite(rep.delta)) rep.delta = 0.0;
  return rep;
}

/// beta_{D,G} = sup_b (max_a P(a,b) - min_c P(c,b)), the unconditional risk
/// ceiling.
inline double beta_gap(const ExactLaw& law, const IndexPair& pair) {
  const detail::PairSplitter split(pair, law);
  double beta = 0.0;
  pattern_t joint(law.positions.size());
  for (const pattern_t& b : detail::data_patterns(law, pair, split)) {
    double mx = 0.0, mn = std::numeric_limits<double>::infinity();
    pattern_t a(pair.guess.size(), 0);
    do {
      split.assemble(b, a, joint);
      const double m = law.mass(joint);
      mx = std::max(mx, m);
      mn = std::min(mn, m);
    } while (next_pattern(a, law.alphabet));
    beta = std::max(beta, mx - mn);
  }
  return beta;
}

/// beta <= pbar^K when sup p(a|x) = pbar < 1.
inline double beta_upper_bound(double pbar, int K) {
  if (!(pbar > 0.0 && pbar < 1.0)) throw std::invalid_argument("beta_upper_bound: pbar must be in (0,1)");
  if (K < 1) throw std::invalid_argument("beta_upper_bound: K must be >= 1");
  return std::pow(pbar, K);
}

struct RiskReport {
  double value = 0.0;
  std::map<pattern_t, double> per_b;
  pattern_t achieving_b;
};

/// Excess risk of a fitted rule, evaluated exactly by enumeration in the
/// joint form sup_b [max_a P(a,b) - P(rule(b),b)], which is algebraically
/// identical to the conditional-times-weight form but avoids divisions by
/// small P(b).
inline RiskReport excess_risk_exact(const GuessRule& rule, const ExactLaw& law) {
  const detail::PairSplitter split(rule.pair, law);
  RiskReport rep;
  bool first = true;
  pattern_t joint(law.positions.size());
  for (const pattern_t& b : detail::data_patterns(law, rule.pair, split)) {
    double best = 0.0;
    pattern_t a(rule.pair.guess.size(), 0);
    do {
      split.assemble(b, a, joint);
      best = std::max(best, law.mass(joint));
    } while (next_pattern(a, law.alphabet));
    split.assemble(b, guess(rule, b), joint);
    const double regret = best - law.mass(joint);
    rep.per_b.emplace(b, regret);
    if (first || regret > rep.value) {
      rep.value = regret;
      rep.achieving_b = b;
      first = false;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo risk over training replicates
// ---------------------------------------------------------------------------

struct McRiskSummary {
  double mean = 0.0;
  double se = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  long long replicates = 0;
  std::vector<double> values;  // per replicate, in replicate order
};

namespace detail {

inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const auto idx = static_cast<std::size_t>(
      std::llround(q * static_cast<double>(sorted.size() - 1)));
  return sorted[std::min(idx, sorted.size() - 1)];
}

inline McRiskSummary summarize_replicates(std::vector<double> values) {
  McRiskSummary s;
  s.replicates = static_cast<long long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;  // fixed replicate order: bit-exact aggregate
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  if (values.size() > 1) {
    s.se = std::sqrt(ss / static_cast<double>(values.size() - 1)) /
           std::sqrt(static_cast<double>(values.size()));
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.q05 = sorted_quantile(sorted, 0.05);
  s.q95 = sorted_quantile(sorted, 0.95);
  s.values = std::move(values);
  return s;
}

}  // namespace detail

/// Risk distribution of the estimator over independent training samples:
/// replicate r simulates X_1^n on the stream derived from (seed, r), fits the
/// rule and evaluates its risk exactly against the model law. Deterministic
/// given the seed, independent of thread count.
inline McRiskSummary excess_risk_mc(const ProcessModel& model, const IndexPair& pair,
                                    long long n, long long replicates, std::uint64_t seed,
                                    long long burn_in = -1, std::size_t threads = 0) {
  if (replicates < 1) throw std::invalid_argument("excess_risk_mc: replicates must be >= 1");
  if (n < pair.span) throw std::invalid_argument("excess_risk_mc: n must be >= diam(D ∪ G)");
  const ExactLaw law = exact_finite_law(model, pair.joint);
  const long long burn = burn_in < 0 ? default_burn_in(model) : burn_in;
  std::vector<double> values(static_cast<std::size_t>(replicates));
  parallel_for(static_cast<std::size_t>(replicates), threads, [&](std::size_t r) {
    SimulationPlan plan{model, n, derive_stream_seed(seed, r), burn, -1};
    const sample_t sample = simulate(plan);
    const GuessRule rule = fit_guess_rule(count_patterns(sample, pair));
    values[r] = excess_risk_exact(rule, law).value;
  });
  return detail::summarize_replicates(std::move(values));
}

// ---------------------------------------------------------------------------
// Sample-size and concentration bounds
// ---------------------------------------------------------------------------

struct SampleSizeResult {
  long long n = 0;
  bool guaranteed_by_beta = false;  // epsilon >= beta: risk <= beta holds unconditionally
};

/// Finite-sample guarantee: smallest n prescribed by the sample-size bound so
/// that the risk is at most epsilon ∧ beta.
inline SampleSizeResult sample_size_bound(double epsilon, double delta, double beta,
                                          double gamma, int K, int L) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("sample_size_bound: epsilon must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("sample_size_bound: gamma must be in (0,1]");
  if (!(beta >= 0.0)) throw std::invalid_argument("sample_size_bound: beta must be >= 0");
  if (delta < 0.0) throw std::invalid_argument("sample_size_bound: delta must be >= 0");
  if (K < 1 || L < K) throw std::invalid_argument("sample_size_bound: need K >= 1 and L >= K");
  if (epsilon >= beta) return {static_cast<long long>(L) - 1, true};
  const double d = std::max(epsilon / 2.0, delta);
  const double kg = static_cast<double>(K) / gamma;
  const double val = 4.0 / (d * d) *
                         (kg * kg * std::log(2.0 * beta / epsilon) +
                          4.0 * static_cast<double>(K) * (1.0 - gamma) / gamma + 2.0) +
                     static_cast<double>(L) - 2.0;
  if (!(val < 9.0e18)) return {std::numeric_limits<long long>::max(), false};
  return {static_cast<long long>(std::ceil(val)), false};
}

struct DkwBound {
  double threshold = 0.0;
  double tail = 1.0;
};

/// DKW-type deviation bound for empirical pattern frequencies, evaluated
/// verbatim with the statement's n - k + 2 normalizer (k = sup S - inf S).
inline DkwBound dkw_bound(double u, long long n, int k, int S_size, double gamma) {
  if (!(u > 0.0)) throw std::invalid_argument("dkw_bound: u must be > 0");
  if (k < 0 || n < std::max(1, k)) throw std::invalid_argument("dkw_bound: need n >= k >= 0");
  if (S_size < 1) throw std::invalid_argument("dkw_bound: S_size must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("dkw_bound: gamma must be in (0,1]");
  const double windows = static_cast<double>(n - k + 2);
  DkwBound b;
  b.threshold = u + std::sqrt((2.0 * S_size * (1.0 - gamma) + gamma) / (gamma * windows));
  b.tail = std::exp(-2.0 * windows * gamma * gamma * u * u / (static_cast<double>(S_size) * S_size));
  return b;
}

/// sup_sigma |r_hat(sigma) - P(X_S = sigma)| where r_hat counts occurrences of
/// sigma over the shifts that fit in the sample and divides by the bound's
/// n - k + 2 normalizer.
inline double empirical_sup_deviation(const sample_t& sample, std::vector<int> S,
                                      const ExactLaw& law) {
  const std::vector<int> pos = normalize_positions(std::move(S));
  if (law.positions != pos) throw std::invalid_argument("law support does not match S");
  const long long n = static_cast<long long>(sample.size());
  const int k = pos.back() - 1;
  if (n < k + 1) throw std::invalid_argument("empirical_sup_deviation: need n >= k + 1");
  const double normalizer = static_cast<double>(n - k + 2);
  std::map<pattern_t, std::int64_t> counts;
  pattern_t sigma(pos.size());
  for (long long i = 0; i + k + 1 <= n; ++i) {
    for (std::size_t j = 0; j < pos.size(); ++j) {
      sigma[j] = sample[static_cast<std::size_t>(pos[j] - 1 + i)];
    }
    ++counts[sigma];
  }
  double sup = 0.0;
  for (const auto& [pat, c] : counts) {
    sup = std::max(sup, std::abs(static_cast<double>(c) / normalizer - law.mass(pat)));
  }
  for (const auto& [pat, p] : law.probs) {
    if (counts.find(pat) == counts.end()) sup = std::max(sup, p);
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Rate regimes
// ---------------------------------------------------------------------------

enum class Regime { kSubcritical, kSupercritical, kFixed };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::kSubcritical: return "subcritical";
    case Regime::kSupercritical: return "supercritical";
    case Regime::kFixed: return "fixed";
  }
  return "unknown";
}

struct RegimeBound {
  Regime regime = Regime::kSubcritical;
  double bound = 0.0;
};

/// Finite-n regime classification: the subcritical/supercritical dichotomy
/// is asymptotic, so delta_n sqrt(n / log n) <=> 1 serves as the documented
/// proxy.
/// Subcritical: (1/2) sqrt(log n / n) ∧ beta; supercritical:
/// exp(-Gamma^2 n delta_n^2 / (8 K^2)) ∧ beta.
inline RegimeBound rate_regime_bound(double delta_n, long long n, double gamma, int K,
                                     double beta) {
  if (n < 2) throw std::invalid_argument("rate_regime_bound: n must be >= 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("rate_regime_bound: gamma must be in (0,1]");
  if (K < 1) throw std::invalid_argument("rate_regime_bound: K must be >= 1");
  if (delta_n < 0.0 || beta < 0.0) throw std::invalid_argument("rate_regime_bound: negative inputs");
  const double nn = static_cast<double>(n);
  const double t = delta_n * std::sqrt(nn / std::log(nn));
  RegimeBound rb;
  if (t <= 1.0) {
    rb.regime = Regime::kSubcritical;
    rb.bound = std::min(0.5 * std::sqrt(std::log(nn) / nn), beta);
  } else {
    rb.regime = Regime::kSupercritical;
    const double kk = static_cast<double>(K);
    rb.bound = std::min(std::exp(-gamma * gamma * nn * delta_n * delta_n / (8.0 * kk * kk)), beta);
  }
  return rb;
}

// ---------------------------------------------------------------------------
// KL / chi-square lemma
// ---------------------------------------------------------------------------

struct KlChi2 {
  double kl = 0.0;
  double chi2 = 0.0;
};

/// KL(P||Q) and its chi-square upper bound, with the lemma's conventions
/// 0 log(0/0) = 0 and 0/0 = 0.
inline KlChi2 kl_chi2(const std::vector<double>& P, const std::vector<double>& Q) {
  if (P.size() != Q.size()) throw std::invalid_argument("kl_chi2: supports differ");
  KlChi2 r;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double p = P[i], q = Q[i];
    if (p > 0.0 && q == 0.0) {
      throw std::invalid_argument("kl_chi2: P is not absolutely continuous w.r.t. Q");
    }
    if (p > 0.0) r.kl += p * std::log(p / q);
    if (q > 0.0) r.chi2 += (p - q) * (p - q) / q;
  }
  if (r.kl > r.chi2 + 1e-12 * std::max(1.0, r.chi2)) {
    throw std::logic_error("kl_chi2: KL exceeded its chi-square bound");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Le Cam two-point construction
// ---------------------------------------------------------------------------

struct LeCamRegime {
  enum class Kind { kRootN, kMargin } kind = Kind::kRootN;
  double delta_n = 0.0;

  static LeCamRegime root_n() { return {Kind::kRootN, 0.0}; }
  static LeCamRegime margin(double delta_n) { return {Kind::kMargin, delta_n}; }
};

struct LeCamPair {
  IidModel p0, p1;
  double perturbation = 0.0;
  symbol_t a0 = 0, a1 = 1;
  double chi2_step = 0.0;
  double kl_bound = 0.0;
  double minimax_value = 0.0;
};

/// Truncation used to represent the declared-infinite alphabet: tail masses
/// 2^{-i} down to 2^{-60} keep the stored vector a valid probability vector
/// to well below 1e-12 while the chi-square step stays exact (the tail
/// cancels).
inline constexpr std::uint32_t kLeCamInfiniteTruncation = 61;

/// The lower-bound proof's two-point family: product measures that swap
/// 1/4 +- perturbation (+ 2^-|A| when A is finite) between two distinguished
/// symbols, with dyadic tail masses. `alphabet` 0 declares A infinite.
inline LeCamPair lecam_pair(long long n, std::uint32_t alphabet, LeCamRegime regime,
                            const IndexPair& pair) {
  if (n < 2) throw std::invalid_argument("lecam_pair: n must be >= 2");
  if (alphabet == 1) throw std::invalid_argument("lecam_pair: alphabet must have >= 2 symbols");
  LeCamPair lc;
  const bool infinite = alphabet == 0;
  const std::uint32_t stored = infinite ? kLeCamInfiniteTruncation : alphabet;
  const double corr = infinite ? 0.0 : std::pow(2.0, -static_cast<double>(alphabet));
  double pert = 0.0;
  if (regime.kind == LeCamRegime::Kind::kRootN) {
    pert = 1.0 / (8.0 * std::sqrt(static_cast<double>(n)));
  } else {
    if (!(regime.delta_n > 0.0 && regime.delta_n < 2.0)) {
      throw std::invalid_argument("lecam_pair: margin regime needs delta_n in (0, 2)");
    }
    pert = regime.delta_n / 8.0;
  }
  if (0.25 - pert + corr <= 0.0) {
    throw std::invalid_argument("lecam_pair: perturbation makes a mass non-positive");
  }
  std::vector<double> masses(stored, 0.0);
  masses[0] = 0.25 + pert + corr;
  masses[1] = 0.25 - pert + corr;
  for (std::uint32_t i = 2; i < stored; ++i) masses[i] = std::pow(2.0, -static_cast<double>(i));
  lc.p0.probs = masses;
  std::swap(masses[0], masses[1]);
  lc.p1.probs = masses;
  validate(lc.p0);
  validate(lc.p1);
  lc.perturbation = pert;
  for (std::size_t i = 0; i < stored; ++i) {
    const double d = lc.p0.probs[i] - lc.p1.probs[i];
    if (d != 0.0) lc.chi2_step += d * d / lc.p1.probs[i];
  }
  if (regime.kind == LeCamRegime::Kind::kRootN) {
    // holds for every n >= 2: both perturbed masses stay >= 1/4 - 1/(8 sqrt 2)
    if (lc.chi2_step > (1.0 + 1e-12) / static_cast<double>(n)) {
      throw std::logic_error("lecam_pair: chi-square step exceeded 1/n");
    }
  } else if (lc.chi2_step > regime.delta_n * regime.delta_n * (1.0 + 1e-12)) {
    // the delta_n^2 cap needs 1/p0 + 1/p1 <= 16, which a large delta_n with a
    // thin 2^-|A| correction can break; that is outside the construction's
    // domain, so reject the input rather than report a bogus KL bound
    throw std::invalid_argument(
        "lecam_pair: delta_n too large for the chi-square cap (needs roughly delta_n <= 1)");
  }
  lc.kl_bound = static_cast<double>(n) * lc.chi2_step;
  const double quarter_pow = std::pow(0.25, pair.symbols);
  if (regime.kind == LeCamRegime::Kind::kRootN) {
    lc.minimax_value = std::exp(-1.0) / std::sqrt(static_cast<double>(n)) * quarter_pow;
  } else {
    lc.minimax_value = regime.delta_n *
                       std::exp(-static_cast<double>(n) * regime.delta_n * regime.delta_n) * quarter_pow;
  }
  return lc;
}

/// Exact average error of the optimal likelihood test between P0^n and P1^n.
/// P0 and P1 differ only on {a0, a1}, so the test reduces to comparing the
/// counts of a0 and a1; the error is summed exactly over the trinomial
/// (#a0 + #a1, #a0) distribution in log space, windowed far beyond double
/// precision.
inline double bayes_error_oracle(const LeCamPair& pair, long long n) {
  if (n < 1) throw std::invalid_argument("bayes_error_oracle: n must be >= 1");
  if (n > 1000000) {
    throw std::invalid_argument("bayes_error_oracle: exact binomial summation limited to n <= 1e6");
  }
  const double p = pair.p0.probs[pair.a0];
  const double q = pair.p0.probs[pair.a1];
  if (p == q) return 0.5;
  std::vector<double> lg(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t i = 2; i <= static_cast<std::size_t>(n); ++i) {
    lg[i] = lg[i - 1] + std::log(static_cast<double>(i));
  }
  const double c = p + q;
  const double pp = p / c;
  const double lpp = std::log(pp), lqq = std::log1p(-pp);

  auto log_binom = [&](long long m, long long k, double lsucc, double lfail) {
    return lg[static_cast<std::size_t>(m)] - lg[static_cast<std::size_t>(k)] -
           lg[static_cast<std::size_t>(m - k)] + static_cast<double>(k) * lsucc +
           static_cast<double>(m - k) * lfail;
  };

  // Error of the likelihood test given m = #a0 + #a1 occurrences:
  // P(#a0 < #a1) + (1/2) P(#a0 = #a1), with #a0 ~ Bin(m, pp).
  auto inner = [&](long long m) -> double {
    if (m == 0) return 0.5;
    const double mu = pp * static_cast<double>(m);
    const double sd = std::sqrt(std::max(1.0, static_cast<double>(m) * pp * (1.0 - pp)));
    const long long klo = std::max<long long>(0, static_cast<long long>(std::floor(mu - 40.0 * sd)));
    const long long khi = std::min<long long>(m, static_cast<long long>(std::ceil(mu + 40.0 * sd)));
    const long long half_lt = (m - 1) / 2;  // #a0 <= half_lt  <=>  #a0 < #a1
    double cdf = 0.0;
    for (long long k2 = klo; k2 <= std::min(half_lt, khi); ++k2) {
      cdf += std::exp(log_binom(m, k2, lpp, lqq));
    }
    double tie = 0.0;
    if (m % 2 == 0) {
      const long long k2 = m / 2;
      if (k2 >= klo && k2 <= khi) tie = std::exp(log_binom(m, k2, lpp, lqq));
    }
    return cdf + 0.5 * tie;
  };

  if (c >= 1.0 - 1e-15) return inner(n);  // two-symbol alphabet: m = n surely
  const double lc = std::log(c), lr = std::log1p(-c);
  const double mu = c * static_cast<double>(n);
  const double sd = std::sqrt(std::max(1.0, static_cast<double>(n) * c * (1.0 - c)));
  const long long mlo = std::max<long long>(0, static_cast<long long>(std::floor(mu - 40.0 * sd)));
  const long long mhi = std::min<long long>(n, static_cast<long long>(std::ceil(mu + 40.0 * sd)));
  double err = 0.0;
  for (long long m = mlo; m <= mhi; ++m) {
    err += std::exp(log_binom(n, m, lc, lr)) * inner(m);
  }
  return err;
}

// ---------------------------------------------------------------------------
// BoundReport: the composed per-problem summary
// ---------------------------------------------------------------------------

struct BoundReport {
  double gamma = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  long long required_n = 0;
  bool guaranteed_by_beta = false;
  Regime regime = Regime::kSubcritical;
  double regime_bound = 0.0;
  double dkw_u = 0.0;
  double dkw_threshold = 0.0;
  double dkw_tail = 1.0;
  double lower_bound = 0.0;      // minimax value, as printed
  double lower_bound_half = 0.0; // conservative (1/2) e^{-KL} variant
};

/// Composes margin, gap, Gamma, the sample-size requirement, the regime bound
/// and the two-point lower bound for one (model, D, G, epsilon) problem. When
/// `n` is negative the report is evaluated at max(required_n, L, 2).
inline BoundReport make_bound_report(const ProcessModel& model, const IndexPair& pair,
                                     double epsilon, long long n = -1, double u = 0.1) {
  BoundReport rep;
  rep.epsilon = epsilon;
  const GammaBound g = gamma_bound(model);
  if (g.violated) throw std::invalid_argument("make_bound_report: Assumption A violated (Var_0 >= 1)");
  rep.gamma = std::min(1.0, g.lower_bound);
  const ExactLaw law = exact_finite_law(model, pair.joint);
  rep.delta = margin_delta(law, pair).delta;
  rep.beta = beta_gap(law, pair);
  const SampleSizeResult ss =
      sample_size_bound(epsilon, rep.delta, rep.beta, rep.gamma, pair.symbols, pair.span);
  rep.required_n = ss.n;
  rep.guaranteed_by_beta = ss.guaranteed_by_beta;
  if (n < 0) n = std::max<long long>({rep.required_n, pair.span, 2});
  const RegimeBound rb = rate_regime_bound(rep.delta, n, rep.gamma, pair.symbols, rep.beta);
  rep.regime = rb.regime;
  rep.regime_bound = rb.bound;
  rep.dkw_u = u;
  const DkwBound dkw = dkw_bound(u, n, pair.span - 1, pair.symbols, rep.gamma);
  rep.dkw_threshold = dkw.threshold;
  rep.dkw_tail = dkw.tail;
  const LeCamRegime regime = rb.regime == Regime::kSupercritical && rep.delta > 0.0 && rep.delta < 2.0
                                 ? LeCamRegime::margin(rep.delta)
                                 : LeCamRegime::root_n();
  const Alphabet a = alphabet_of(model);
  const LeCamPair lc = lecam_pair(n, a.unbounded ? 0 : a.size, regime, pair);
  rep.lower_bound = lc.minimax_value;
  rep.lower_bound_half = 0.5 * lc.minimax_value;
  return rep;
}

}  // namespace pathguess
