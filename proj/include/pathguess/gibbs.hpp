#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathguess {

// ---------------------------------------------------------------------------
// Gamma calculus for one-dimensional Gibbs potentials.
//
// The input is the oscillation profile of a translation-invariant interaction
// restricted to shapes containing the origin, aggregated by reach
// (max Lambda, with min Lambda = 0):
//
//   rho(l) = sum over shapes with reach l of Delta(Phi_Lambda)
//
// given as an explicit finite catalog and/or a power-law continuation. The
// variation bounds evaluated here are
//
//   Var_k <= S(k) := (|A|/2) sum_{i >= k} sigma(i),
//   sigma(i)      = sum_{l >= ceil(i/2)} rho(l),
//
// together with n_star (first k with S(k) < 1) and the resulting product
// lower bound on Gamma. Every analytic tail uses an upper majorant
// sum_{l >= m} l^{-p} <= m^{-p} + m^{1-p}/(p-1), so the reported values stay
// valid bounds. Only pair interactions appear in the built-in catalog (the
// long-range Ising profile rho(l) = 2 l^{-alpha}); richer potentials enter
// through explicit shape lists.
// ---------------------------------------------------------------------------

struct GibbsShape {
  int reach = 1;           // max Lambda for a shape with min Lambda = 0
  double oscillation = 0;  // Delta(Phi_Lambda) summed over shapes of this reach
};

struct PowerLawTail {
  double coefficient = 0.0;
  double exponent = 0.0;  // rho(l) = coefficient * l^{-exponent}
};

struct GibbsPotential {
  std::uint32_t alphabet = 2;
  std::vector<GibbsShape> shapes;     // explicit catalog
  std::optional<PowerLawTail> tail;   // applies beyond the catalog's max reach
};

/// 1D long-range Ising pair potential Phi_{i,j}(x) = |i-j|^{-alpha} x_i x_j:
/// oscillation 2 l^{-alpha} at reach l.
inline GibbsPotential ising_long_range(double alpha, std::uint32_t alphabet = 2) {
  if (!(alpha > 0.0)) throw std::invalid_argument("ising_long_range: alpha must be > 0");
  GibbsPotential p;
  p.alphabet = alphabet;
  p.tail = PowerLawTail{2.0, alpha};
  return p;
}

struct GibbsReport {
  std::vector<double> var_bounds;  // S(k), k = 0..k_max
  long long n_star = -1;
  double gamma_lower = 0.0;
  bool convergent = false;
  std::string note;
};

namespace detail {

/// Upper bound on sum_{l >= m} l^{-p}; infinite when p <= 1.
inline double zeta_tail_upper(double p, double m) {
  if (p <= 1.0) return std::numeric_limits<double>::infinity();
  return std::pow(m, -p) + std::pow(m, 1.0 - p) / (p - 1.0);
}

}  // namespace detail

inline GibbsReport gibbs_gamma(const GibbsPotential& potential, int k_max) {
  if (k_max < 0) throw std::invalid_argument("gibbs_gamma: k_max must be >= 0");
  if (potential.alphabet < 2) throw std::invalid_argument("gibbs_gamma: alphabet must have >= 2 symbols");
  int catalog_reach = 0;
  for (const auto& s : potential.shapes) {
    if (s.reach < 1 || !(s.oscillation >= 0.0)) {
      throw std::invalid_argument("gibbs_gamma: shapes need reach >= 1 and oscillation >= 0");
    }
    catalog_reach = std::max(catalog_reach, s.reach);
  }
  const double half_a = 0.5 * static_cast<double>(potential.alphabet);
  const bool has_tail = potential.tail.has_value() && potential.tail->coefficient > 0.0;
  const double tail_c = has_tail ? potential.tail->coefficient : 0.0;
  const double tail_p = has_tail ? potential.tail->exponent : 0.0;
  const int tail_start = catalog_reach + 1;  // analytic profile continues the catalog

  GibbsReport rep;
  if (has_tail && tail_p <= 2.0) {
    // sigma(i) itself is not summable: every Var_k bound is infinite.
    rep.var_bounds.assign(static_cast<std::size_t>(k_max) + 1,
                          std::numeric_limits<double>::infinity());
    rep.note = "oscillation series not summable: Var_k bounds diverge (need exponent > 2)";
    return rep;
  }

  // Explicit evaluation horizon, with analytic majorants past it.
  const long long n_cut = std::max<long long>(32768, k_max);
  const long long i_cut =
      std::max<long long>({65536, n_cut + 1, 2LL * catalog_reach + 2, 2LL * k_max + 2});
  const long long l_cut = std::max<long long>(262144, static_cast<long long>(tail_start) + 1);

  // rho suffix sums over [1, l_cut], then the analytic remainder.
  std::vector<double> rho(static_cast<std::size_t>(l_cut) + 2, 0.0);
  for (const auto& s : potential.shapes) {
    rho[static_cast<std::size_t>(s.reach)] += s.oscillation;
  }
  if (has_tail) {
    for (long long l = tail_start; l <= l_cut; ++l) {
      rho[static_cast<std::size_t>(l)] += tail_c * std::pow(static_cast<double>(l), -tail_p);
    }
  }
  const double rho_rest =
      has_tail ? tail_c * detail::zeta_tail_upper(tail_p, static_cast<double>(l_cut) + 1.0) : 0.0;
  std::vector<double> rho_suffix(static_cast<std::size_t>(l_cut) + 2, 0.0);
  rho_suffix[static_cast<std::size_t>(l_cut) + 1] = rho_rest;
  for (long long l = l_cut; l >= 1; --l) {
    rho_suffix[static_cast<std::size_t>(l)] = rho_suffix[static_cast<std::size_t>(l) + 1] +
                                              rho[static_cast<std::size_t>(l)];
  }
  auto tail_rho = [&](long long m) {  // sum_{l >= m} rho(l)
    if (m <= l_cut) return rho_suffix[static_cast<std::size_t>(std::max<long long>(m, 1))];
    return has_tail ? tail_c * detail::zeta_tail_upper(tail_p, static_cast<double>(m)) : 0.0;
  };

  // sigma(i) = tail_rho(ceil(i/2) ∨ 1) for i = 0..i_cut, and its suffix sums.
  std::vector<double> sigma_suffix(static_cast<std::size_t>(i_cut) + 2, 0.0);
  double sigma_rest = 0.0;
  if (has_tail) {
    // sum_{i > i_cut} sigma(i) <= sum_{i > i_cut} C [(i/2)^{-p} + (i/2)^{1-p}/(p-1)]
    const double m = static_cast<double>(i_cut) + 1.0;
    sigma_rest = tail_c * std::pow(2.0, tail_p) * detail::zeta_tail_upper(tail_p, m) +
                 tail_c * std::pow(2.0, tail_p - 1.0) / (tail_p - 1.0) *
                     detail::zeta_tail_upper(tail_p - 1.0, m);
  }
  sigma_suffix[static_cast<std::size_t>(i_cut) + 1] = sigma_rest;
  for (long long i = i_cut; i >= 0; --i) {
    const long long m = std::max<long long>(1, (i + 1) / 2);
    sigma_suffix[static_cast<std::size_t>(i)] =
        sigma_suffix[static_cast<std::size_t>(i) + 1] + tail_rho(m);
  }
  auto S = [&](long long k) { return half_a * sigma_suffix[static_cast<std::size_t>(k)]; };

  rep.var_bounds.resize(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) rep.var_bounds[static_cast<std::size_t>(k)] = S(k);

  long long n_star = -1;
  for (long long k = 0; k <= n_cut; ++k) {
    if (S(k) < 1.0) {
      n_star = k;
      break;
    }
  }
  rep.n_star = n_star;
  if (n_star < 0) {
    rep.note = "Var bound never drops below 1 within the evaluation horizon";
    return rep;
  }

  // Tail of the product: prod_{n > n_cut} (1 - S(n)) >= 1 - sum_{n > n_cut} S(n),
  // and sum_{n > N} S(n) = (|A|/2) sum_{i > N} (i - N) sigma(i)
  //                     <= (|A|/2) sum_{i > N} i sigma(i), finite only when
  // the profile exponent exceeds 3.
  double product_tail_sum = 0.0;
  if (has_tail) {
    if (tail_p <= 3.0) {
      rep.note = "assumption not verifiable: Gamma product diverges (need exponent > 3)";
      return rep;
    }
    const double m = static_cast<double>(n_cut) + 1.0;
    product_tail_sum = half_a * (tail_c * std::pow(2.0, tail_p) *
                                     detail::zeta_tail_upper(tail_p - 1.0, m) +
                                 tail_c * std::pow(2.0, tail_p - 1.0) / (tail_p - 1.0) *
                                     detail::zeta_tail_upper(tail_p - 2.0, m));
  }

  double product = 1.0;
  for (long long nn = n_star; nn <= n_cut; ++nn) {
    const double s = S(nn);
    if (s <= 0.0) break;  // suffix sums are nonincreasing; all later factors are 1
    product *= 1.0 - s;
  }
  rep.gamma_lower = product * std::max(0.0, 1.0 - product_tail_sum);
  rep.convergent = true;
  return rep;
}

}  // namespace pathguess
