#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pathguess/analysis.hpp"
#include "oracle_helpers.hpp"

using namespace pathguess;
using Catch::Approx;

namespace {

const std::vector<std::vector<double>> kQ{{0.9, 0.1}, {0.2, 0.8}};

GuessRule constant_rule(const IndexPair& pair, symbol_t a) {
  GuessRule r;
  r.pair = pair;
  r.fallback = pattern_t(pair.guess.size(), a);
  return r;
}

GuessRule optimal_rule(const ExactLaw& law, const IndexPair& pair) {
  GuessRule r;
  r.pair = pair;
  pathguess::detail::PairSplitter split(pair, law);
  pattern_t joint(law.positions.size());
  pattern_t b(pair.data.size(), 0);
  do {
    double best = -1.0;
    pattern_t arg;
    pattern_t a(pair.guess.size(), 0);
    do {
      split.assemble(b, a, joint);
      const double m = law.mass(joint);
      if (m > best) {
        best = m;
        arg = a;
      }
    } while (next_pattern(a, law.alphabet));
    r.table.emplace(b, arg);
  } while (next_pattern(b, law.alphabet));
  r.fallback = pattern_t(pair.guess.size(), 0);
  return r;
}

oracle::JointView view_of(const ExactLaw& law, const IndexPair& pair) {
  return oracle::JointView{&law.probs, &pair, law.alphabet};
}

}  // namespace

TEST_CASE("margin examples") {
  const IndexPair pair = normalize_index_pair({}, {1});
  SECTION("iid (0.5, 0.3, 0.2): positive gaps are 0.2 and 0.3") {
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.3, 0.2}}, {1});
    const MarginReport rep = margin_delta(law, pair);
    REQUIRE(rep.delta == Approx(0.2).margin(1e-12));
    REQUIRE(rep.per_b.at({}) == Approx(0.2).margin(1e-12));
  }
  SECTION("uniform law has no positive gap") {
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.5}}, {1});
    REQUIRE(margin_delta(law, pair).delta == 0.0);
  }
  SECTION("two-coordinate guess set against the brute-force definition") {
    const IndexPair pair2 = normalize_index_pair({}, {1, 2});
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.3, 0.2}}, {1, 2});
    const double expected = oracle::margin_brute(view_of(law, pair2));
    REQUIRE(margin_delta(law, pair2).delta == Approx(expected).margin(1e-12));
    REQUIRE(margin_delta(law, pair2).delta == Approx(0.10).margin(1e-12));
  }
}

TEST_CASE("beta gap examples") {
  SECTION("iid (0.5, 0.3, 0.2) on one coordinate") {
    const IndexPair pair = normalize_index_pair({}, {1});
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.3, 0.2}}, {1});
    REQUIRE(beta_gap(law, pair) == Approx(0.3).margin(1e-12));
  }
  SECTION("uniform product laws have zero gap") {
    const IndexPair pair = normalize_index_pair({1}, {2});
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.5}}, {1, 2});
    REQUIRE(beta_gap(law, pair) == Approx(0.0).margin(1e-12));
  }
  SECTION("markov pair set against brute enumeration") {
    const IndexPair pair = normalize_index_pair({1}, {2});
    const ExactLaw law = exact_finite_law(make_markov(kQ), {1, 2});
    REQUIRE(beta_gap(law, pair) == Approx(oracle::beta_brute(view_of(law, pair))).margin(1e-12));
  }
}

TEST_CASE("beta exponential upper bound") {
  REQUIRE(beta_upper_bound(0.9, 2) == Approx(0.81));
  REQUIRE(beta_upper_bound(0.5, 1) == Approx(0.5));
  REQUIRE_THROWS_AS(beta_upper_bound(1.0, 2), std::invalid_argument);
  const IndexPair pair = normalize_index_pair({1}, {2});
  const ExactLaw law = exact_finite_law(make_markov(kQ), {1, 2});
  REQUIRE(beta_gap(law, pair) <= beta_upper_bound(*pbar(make_markov(kQ)), pair.symbols) + 1e-12);
}

TEST_CASE("exact excess risk examples") {
  const IndexPair pair = normalize_index_pair({}, {1});
  const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.3, 0.2}}, {1});
  SECTION("guessing the mode is optimal") {
    REQUIRE(excess_risk_exact(constant_rule(pair, 0), law).value == Approx(0.0).margin(1e-12));
  }
  SECTION("guessing the runner-up") {
    REQUIRE(excess_risk_exact(constant_rule(pair, 1), law).value == Approx(0.2).margin(1e-12));
  }
  SECTION("the worst rule attains beta") {
    const RiskReport rep = excess_risk_exact(constant_rule(pair, 2), law);
    REQUIRE(rep.value == Approx(0.3).margin(1e-12));
    REQUIRE(rep.value == Approx(beta_gap(law, pair)).margin(1e-12));
    REQUIRE(rep.achieving_b == pattern_t{});
  }
}

TEST_CASE("risk is sandwiched between 0 and beta; optimal rules have zero risk") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 60; ++i) {
    const std::uint32_t A = 2 + rng() % 2;
    const IndexPair pair = oracle::random_pair(rng, 3, i);
    const ProcessModel model = i % 2 == 0
                                   ? ProcessModel{IidModel{oracle::random_prob_vector(rng, A)}}
                                   : ProcessModel{make_markov(oracle::random_transition(rng, A))};
    const ExactLaw law = exact_finite_law(model, pair.joint);
    const double beta = beta_gap(law, pair);
    REQUIRE(excess_risk_exact(optimal_rule(law, pair), law).value <= 1e-12);
    const GuessRule rnd = constant_rule(pair, static_cast<symbol_t>(rng() % A));
    const double risk = excess_risk_exact(rnd, law).value;
    REQUIRE(risk >= -1e-15);
    REQUIRE(risk <= beta + 1e-12);
  }
}

TEST_CASE("margin, gap and risk agree with definition-level brute force") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    const std::uint32_t A = 2 + rng() % 2;
    IndexPair pair = oracle::random_pair(rng, 3, i);
    if (pair.symbols > 3) continue;
    const ProcessModel model = i % 2 == 0
                                   ? ProcessModel{IidModel{oracle::random_prob_vector(rng, A)}}
                                   : ProcessModel{make_markov(oracle::random_transition(rng, A))};
    const ExactLaw law = exact_finite_law(model, pair.joint);
    const auto view = view_of(law, pair);
    REQUIRE(margin_delta(law, pair).delta == Approx(oracle::margin_brute(view)).margin(1e-12));
    REQUIRE(beta_gap(law, pair) == Approx(oracle::beta_brute(view)).margin(1e-12));
    const GuessRule rule = constant_rule(pair, static_cast<symbol_t>(rng() % A));
    const double brute = oracle::risk_brute(view, [&](const pattern_t& b) { return guess(rule, b); });
    REQUIRE(excess_risk_exact(rule, law).value == Approx(brute).margin(1e-12));
  }
}

TEST_CASE("monte carlo risk: uniform laws are free") {
  const IndexPair pair = normalize_index_pair({}, {1});
  const McRiskSummary s = excess_risk_mc(IidModel{{0.5, 0.5}}, pair, 50, 200, 11);
  REQUIRE(s.mean == 0.0);
  REQUIRE(s.q95 == 0.0);
}

TEST_CASE("monte carlo risk matches the exact multinomial average at n = 10") {
  // Oracle: enumerate all multinomial outcomes of 10 draws from (0.5,0.3,0.2),
  // apply the lexicographic argmax and average the per-outcome regret.
  const std::vector<double> p{0.5, 0.3, 0.2};
  const double regret[3] = {0.0, 0.2, 0.3};
  double expected = 0.0;
  for (int n0 = 0; n0 <= 10; ++n0) {
    for (int n1 = 0; n1 + n0 <= 10; ++n1) {
      const int n2 = 10 - n0 - n1;
      const int c[3] = {n0, n1, n2};
      double pmf = std::lgamma(11.0);
      for (int i = 0; i < 3; ++i) {
        pmf -= std::lgamma(c[i] + 1.0);
        if (c[i] > 0) pmf += c[i] * std::log(p[static_cast<std::size_t>(i)]);
      }
      const int best = std::max({c[0], c[1], c[2]});
      int arg = 0;
      while (c[arg] != best) ++arg;
      expected += std::exp(pmf) * regret[arg];
    }
  }
  REQUIRE(expected == Approx(0.05089887924).margin(1e-9));
  const IndexPair pair = normalize_index_pair({}, {1});
  const McRiskSummary s = excess_risk_mc(IidModel{p}, pair, 10, 10000, 2024);
  REQUIRE(std::abs(s.mean - expected) <= 5.0 * s.se);
}

TEST_CASE("monte carlo risk is seed-deterministic and self-consistent") {
  const IndexPair pair = normalize_index_pair({1}, {2});
  const McRiskSummary a = excess_risk_mc(make_markov(kQ), pair, 1000, 200, 5, -1, 1);
  const McRiskSummary b = excess_risk_mc(make_markov(kQ), pair, 1000, 200, 5, -1, 8);
  REQUIRE(a.values == b.values);  // thread count cannot change results
  const McRiskSummary c = excess_risk_mc(make_markov(kQ), pair, 1000, 200, 77);
  const double se = std::hypot(a.se, c.se);
  REQUIRE(std::abs(a.mean - c.mean) <= 5.0 * se + 1e-12);
}

TEST_CASE("sample size bound evaluates the printed formula") {
  SECTION("worked plug-in example") {
    const SampleSizeResult r = sample_size_bound(0.1, 0.0, 0.3, 0.3, 2, 2);
    REQUIRE_FALSE(r.guaranteed_by_beta);
    REQUIRE(r.n == 160481);  // ceil of 1600*((2/0.3)^2 log 6 + 18.667 + 2)
  }
  SECTION("epsilon at or above beta needs no data beyond the window") {
    const SampleSizeResult r = sample_size_bound(0.4, 0.0, 0.3, 0.5, 2, 3);
    REQUIRE(r.guaranteed_by_beta);
    REQUIRE(r.n == 2);  // L - 1
  }
  SECTION("a large margin shrinks the requirement") {
    const long long with_margin = sample_size_bound(0.1, 0.3, 0.4, 0.5, 2, 2).n;
    const long long without = sample_size_bound(0.1, 0.0, 0.4, 0.5, 2, 2).n;
    REQUIRE(with_margin < without);
  }
  SECTION("monotonicity grid") {
    const double eps = 0.05, beta = 0.4, gamma = 0.5;
    const long long base = sample_size_bound(eps, 0.0, beta, gamma, 2, 2).n;
    REQUIRE(sample_size_bound(eps * 2, 0.0, beta, gamma, 2, 2).n <= base);   // antitone in eps
    REQUIRE(sample_size_bound(eps, 0.0, beta, gamma * 1.5, 2, 2).n <= base); // antitone in gamma
    REQUIRE(sample_size_bound(eps, 0.0, beta, gamma, 3, 3).n >= base);       // monotone in K
    REQUIRE(sample_size_bound(eps, 0.0, beta, gamma, 2, 6).n >= base);       // monotone in L
    REQUIRE(sample_size_bound(eps, 0.0, beta * 1.5, gamma, 2, 2).n >= base); // monotone in beta
  }
  REQUIRE_THROWS_AS(sample_size_bound(0.0, 0.0, 0.3, 0.5, 1, 1), std::invalid_argument);
}

TEST_CASE("dkw bound threshold and tail formulas") {
  SECTION("worked examples") {
    const DkwBound b1 = dkw_bound(0.1, 1002, 2, 2, 0.5);
    REQUIRE(b1.threshold == Approx(0.1706400733300854).epsilon(1e-12));
    REQUIRE(b1.tail == Approx(0.2857894294498896).epsilon(1e-12));
    const DkwBound b2 = dkw_bound(0.1, 100, 1, 1, 1.0);
    REQUIRE(b2.tail == Approx(0.13265546508012166).epsilon(1e-12));
  }
  SECTION("tail vanishes as u grows") {
    REQUIRE(dkw_bound(50.0, 100, 1, 1, 1.0).tail < 1e-300);
  }
  SECTION("monotonicity") {
    const DkwBound base = dkw_bound(0.1, 1000, 1, 2, 0.5);
    REQUIRE(dkw_bound(0.2, 1000, 1, 2, 0.5).tail < base.tail);     // in u
    REQUIRE(dkw_bound(0.1, 2000, 1, 2, 0.5).tail < base.tail);     // in n
    REQUIRE(dkw_bound(0.1, 1000, 1, 2, 0.9).tail < base.tail);     // in Gamma
    REQUIRE(dkw_bound(0.1, 1000, 1, 4, 0.5).tail > base.tail);     // in |S|
  }
}

TEST_CASE("empirical sup deviation uses the n - k + 2 normalizer") {
  SECTION("constant sample against a uniform law") {
    const sample_t s(100, 0);
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.5}}, {1});
    // 100 occurrences of (0) over normalizer 102, no occurrences of (1)
    const double expected = std::max(100.0 / 102.0 - 0.5, 0.5);
    REQUIRE(empirical_sup_deviation(s, {1}, law) == Approx(expected).margin(1e-15));
  }
  SECTION("matching frequencies leave only the normalizer residue") {
    sample_t s(100);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = i % 2;
    const ExactLaw law = exact_finite_law(IidModel{{0.5, 0.5}}, {1});
    REQUIRE(empirical_sup_deviation(s, {1}, law) <= 1.0 / 102.0 + 1e-15);
  }
  SECTION("bounded by one on arbitrary samples") {
    std::mt19937_64 rng(41);
    const ExactLaw law = exact_finite_law(IidModel{{0.25, 0.25, 0.5}}, {1, 2});
    for (int i = 0; i < 20; ++i) {
      const sample_t s = oracle::random_sample(rng, 30, 3);
      const double d = empirical_sup_deviation(s, {1, 2}, law);
      REQUIRE(d >= 0.0);
      REQUIRE(d <= 1.0);
    }
  }
}

TEST_CASE("rate regime classification and bounds") {
  SECTION("zero margin is subcritical") {
    const RegimeBound rb = rate_regime_bound(0.0, 10000, 1.0, 1, 1.0);
    REQUIRE(rb.regime == Regime::kSubcritical);
    REQUIRE(rb.bound == Approx(0.015174271293851465).epsilon(1e-12));
  }
  SECTION("stable margin is supercritical") {
    const RegimeBound rb = rate_regime_bound(0.2, 10000, 0.3, 2, 1.0);
    REQUIRE(rb.regime == Regime::kSupercritical);
    REQUIRE(rb.bound == Approx(std::exp(-1.125)).epsilon(1e-12));
  }
  SECTION("beta caps both regimes") {
    REQUIRE(rate_regime_bound(0.0, 10000, 1.0, 1, 0.0).bound == 0.0);
    REQUIRE(rate_regime_bound(0.5, 10000, 1.0, 1, 0.0).bound == 0.0);
  }
}

TEST_CASE("KL against its chi-square bound") {
  SECTION("identical distributions") {
    const KlChi2 r = kl_chi2({0.3, 0.7}, {0.3, 0.7});
    REQUIRE(r.kl == 0.0);
    REQUIRE(r.chi2 == 0.0);
  }
  SECTION("worked example") {
    const KlChi2 r = kl_chi2({0.5, 0.5}, {0.25, 0.75});
    REQUIRE(r.kl == Approx(0.14384103622589042).epsilon(1e-12));
    REQUIRE(r.chi2 == Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SECTION("zero-mass convention") {
    const KlChi2 r = kl_chi2({0.0, 1.0}, {0.5, 0.5});
    REQUIRE(std::isfinite(r.kl));
    REQUIRE(std::isfinite(r.chi2));
  }
  SECTION("absolute continuity is enforced") {
    REQUIRE_THROWS_AS(kl_chi2({0.5, 0.5}, {1.0, 0.0}), std::invalid_argument);
  }
  SECTION("random pairs satisfy the lemma strictly") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 1000; ++i) {
      const std::size_t support = 2 + rng() % 19;
      const auto P = oracle::random_prob_vector(rng, support);
      const auto Q = oracle::random_prob_vector(rng, support);
      const KlChi2 r = kl_chi2(P, Q);
      REQUIRE(r.kl >= 0.0);
      REQUIRE(r.kl < r.chi2);
    }
  }
}

TEST_CASE("le cam pair construction") {
  const IndexPair pair = normalize_index_pair({1}, {2});
  SECTION("binary alphabet, n = 100") {
    const LeCamPair lc = lecam_pair(100, 2, LeCamRegime::root_n(), pair);
    REQUIRE(lc.p0.probs[0] == Approx(0.5125).margin(1e-15));
    REQUIRE(lc.p0.probs[1] == Approx(0.4875).margin(1e-15));
    REQUIRE(lc.chi2_step == Approx(0.002501563477173227).epsilon(1e-12));
    REQUIRE(lc.minimax_value == Approx(0.0022992465073215147).epsilon(1e-12));
    REQUIRE(lc.kl_bound == Approx(100 * lc.chi2_step));
  }
  SECTION("three-symbol alphabet masses") {
    const LeCamPair lc = lecam_pair(100, 3, LeCamRegime::root_n(), pair);
    REQUIRE(lc.p0.probs[0] == Approx(0.25 + 0.0125 + 0.125).margin(1e-15));
    REQUIRE(lc.p0.probs[2] == Approx(0.25).margin(1e-15));
    double sum = 0.0;
    for (double x : lc.p0.probs) sum += x;
    REQUIRE(sum == Approx(1.0).margin(1e-12));
  }
  SECTION("declared-infinite alphabet") {
    const LeCamPair lc = lecam_pair(64, 0, LeCamRegime::root_n(), pair);
    REQUIRE(lc.p0.probs[0] == Approx(0.25 + 1.0 / 64.0).margin(1e-15));
    REQUIRE(lc.p0.probs[2] == Approx(0.25).margin(1e-15));  // 2^-2 tail
    REQUIRE(lc.chi2_step <= 1.0 / 64.0);
  }
  SECTION("swapping the pair is an involution") {
    const LeCamPair lc = lecam_pair(49, 4, LeCamRegime::root_n(), pair);
    std::vector<double> swapped = lc.p0.probs;
    std::swap(swapped[lc.a0], swapped[lc.a1]);
    REQUIRE(swapped == lc.p1.probs);
  }
  SECTION("chi-square step respects its cap on a grid") {
    for (long long n : {4LL, 16LL, 100LL, 10000LL}) {
      for (std::uint32_t A : {2u, 3u, 0u}) {
        REQUIRE(lecam_pair(n, A, LeCamRegime::root_n(), pair).chi2_step <= 1.0 / n + 1e-15);
      }
      const double d = 0.1;
      REQUIRE(lecam_pair(n, 2, LeCamRegime::margin(d), pair).chi2_step <= d * d + 1e-15);
    }
  }
  SECTION("margin regime validation") {
    REQUIRE_THROWS_AS(lecam_pair(100, 2, LeCamRegime::margin(0.0), pair), std::invalid_argument);
    REQUIRE_THROWS_AS(lecam_pair(100, 2, LeCamRegime::margin(2.5), pair), std::invalid_argument);
    // delta_n <= 1 keeps both reciprocal masses small enough for the cap
    REQUIRE_NOTHROW(lecam_pair(100, 10, LeCamRegime::margin(1.0), pair));
    REQUIRE_THROWS_AS(lecam_pair(100, 10, LeCamRegime::margin(1.9), pair), std::invalid_argument);
  }
}

TEST_CASE("bayes error oracle") {
  const IndexPair pair = normalize_index_pair({1}, {2});
  SECTION("indistinguishable hypotheses") {
    LeCamPair lc;
    lc.p0.probs = {0.5, 0.5};
    lc.p1.probs = {0.5, 0.5};
    REQUIRE(bayes_error_oracle(lc, 10) == 0.5);
  }
  SECTION("single observation worked example") {
    LeCamPair lc;
    lc.p0.probs = {0.6, 0.4};
    lc.p1.probs = {0.4, 0.6};
    REQUIRE(bayes_error_oracle(lc, 1) == Approx(0.4).margin(1e-12));
  }
  SECTION("matches exhaustive sequence enumeration on a three-symbol alphabet") {
    const LeCamPair lc = lecam_pair(16, 3, LeCamRegime::root_n(), pair);
    for (long long n : {1LL, 2LL, 3LL, 4LL, 5LL}) {
      // brute force: every x in A^n, optimal likelihood test with the
      // tie broken toward P0's favourite
      double err = 0.0;
      pattern_t x(static_cast<std::size_t>(n), 0);
      do {
        double q0 = 1.0, q1 = 1.0;
        for (symbol_t s : x) {
          q0 *= lc.p0.probs[s];
          q1 *= lc.p1.probs[s];
        }
        err += 0.5 * (q0 >= q1 ? q1 : q0);
      } while (next_pattern(x, 3));
      REQUIRE(bayes_error_oracle(lc, n) == Approx(err).margin(1e-12));
    }
  }
  SECTION("frozen references from the windowed summation") {
    const IndexPair p2 = normalize_index_pair({1}, {2});
    REQUIRE(bayes_error_oracle(lecam_pair(16, 2, LeCamRegime::root_n(), p2), 16) ==
            Approx(0.402698).margin(1e-5));
    REQUIRE(bayes_error_oracle(lecam_pair(100, 2, LeCamRegime::root_n(), p2), 100) ==
            Approx(0.401520).margin(1e-5));
    REQUIRE(bayes_error_oracle(lecam_pair(16, 3, LeCamRegime::root_n(), p2), 16) ==
            Approx(0.386524).margin(1e-5));
  }
  SECTION("size guard") {
    LeCamPair lc;
    lc.p0.probs = {0.6, 0.4};
    REQUIRE_THROWS_AS(bayes_error_oracle(lc, 2000000), std::invalid_argument);
  }
}

TEST_CASE("truncated laws restrict suprema to data patterns above the mass floor") {
  // Hand-built truncated view of an unbounded-alphabet law: symbols 0..2
  // carry all but ~1e-15 of the mass, and the data pattern (2) falls below
  // the 1e-12 support floor, so it must not decide any supremum.
  const IndexPair pair = normalize_index_pair({1}, {2});
  ExactLaw law;
  law.positions = {1, 2};
  law.alphabet = 3;
  law.exhaustive = false;
  law.probs[{0, 0}] = 0.5;
  law.probs[{0, 1}] = 0.2;
  law.probs[{1, 0}] = 0.1;
  law.probs[{1, 1}] = 0.2 - 2e-15;
  law.probs[{2, 0}] = 1e-15;  // P(Y_D = 2) below the floor
  law.probs[{2, 2}] = 1e-15;
  GuessRule bad;
  bad.pair = pair;
  bad.fallback = {1};
  bad.table[{2}] = {1};  // would score regret ~1e-15 under b = 2, max a = 0
  const RiskReport rep = excess_risk_exact(bad, law);
  REQUIRE(rep.per_b.count({2}) == 0);         // b = (2) excluded by the floor
  REQUIRE(rep.per_b.count({0}) == 1);
  REQUIRE(rep.value == Approx(0.3).margin(1e-12));  // decided by b = (0)
  const MarginReport mr = margin_delta(law, pair);
  REQUIRE(mr.per_b.count({2}) == 0);
}

TEST_CASE("bound report composes the analysis operations coherently") {
  const IndexPair pair = normalize_index_pair({1}, {2});
  const BoundReport rep = make_bound_report(make_markov(kQ), pair, 0.1);
  REQUIRE(rep.gamma == Approx(0.3).margin(1e-12));
  REQUIRE(rep.delta == Approx(0.2).margin(1e-10));
  REQUIRE(rep.beta == Approx(8.0 / 15.0).margin(1e-10));
  const SampleSizeResult ss = sample_size_bound(0.1, rep.delta, rep.beta, rep.gamma, 2, 2);
  REQUIRE(rep.required_n == ss.n);
  REQUIRE(rep.required_n >= pair.span - 2);
  REQUIRE(rep.dkw_tail > 0.0);
  REQUIRE(rep.lower_bound >= 0.0);
  REQUIRE(rep.lower_bound_half == Approx(rep.lower_bound / 2.0));
}

TEST_CASE("bound report invariants hold across random problems") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 30; ++i) {
    const std::uint32_t A = 2 + rng() % 2;
    const IndexPair pair = oracle::random_pair(rng, 3, i);
    const ProcessModel model = i % 2 == 0
                                   ? ProcessModel{IidModel{oracle::random_prob_vector(rng, A)}}
                                   : ProcessModel{make_markov(oracle::random_transition(rng, A))};
    const double eps = 0.05 + 0.2 * (static_cast<double>(rng() % 100) / 100.0);
    const BoundReport rep = make_bound_report(model, pair, eps);
    REQUIRE(rep.required_n >= pair.span - 2);
    REQUIRE(rep.dkw_tail > 0.0);
    REQUIRE(rep.dkw_tail <= 1.0);
    REQUIRE(rep.dkw_threshold > rep.dkw_u);
    REQUIRE(rep.lower_bound >= 0.0);
    REQUIRE(rep.gamma > 0.0);
    REQUIRE(rep.gamma <= 1.0);
    REQUIRE(rep.beta >= rep.delta - 1e-12);  // the gap dominates the margin
  }
}

TEST_CASE("sample size saturates instead of overflowing for tiny epsilon") {
  const SampleSizeResult r = sample_size_bound(1e-12, 0.0, 0.5, 0.1, 4, 4);
  REQUIRE(r.n == std::numeric_limits<long long>::max());
}
