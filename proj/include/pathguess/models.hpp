#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "pathguess/core.hpp"

namespace pathguess {

// ---------------------------------------------------------------------------
// Model catalog. Each family exposes a left conditional kernel p(a|x) through
// kernel_next_distribution; finite families additionally admit exact joint
// laws and analytic variation bounds.
// ---------------------------------------------------------------------------

struct IidModel {
  std::vector<double> probs;
};

/// Order-k Markov kernel on alphabet {0..A-1}. Contexts are the k most recent
/// symbols read chronologically as a base-A numeral (oldest symbol = most
/// significant digit); `rows` is the A^k-by-A conditional table, row-major.
struct MarkovModel {
  std::uint32_t alphabet = 0;
  int order = 1;
  std::vector<double> rows;

  std::size_t states() const {
    return checked_pow(alphabet, static_cast<std::size_t>(order),
                       std::numeric_limits<std::size_t>::max() / 2);
  }
  const double* row(std::size_t context) const { return rows.data() + context * alphabet; }
};

/// Binary autoregressive kernel p(a|x) = Y(a (xi0 + sum_j xi_j x_{-j})) with
/// link Y(u) = 1/(1+e^{-2u}) and x in {-1,+1}. Symbol ids map 0 -> -1,
/// 1 -> +1. `xi[j-1]` holds xi_j >= 0; the finite vector is the kernel's
/// memory.
struct BinaryArModel {
  double xi0 = 0.0;
  std::vector<double> xi;
};

/// Count-valued kernel: X_t ~ Poisson(v) with
/// v(x) = exp(sum_j xi_j min(x_{-j}, clip)), xi_j <= 0, clip > 0.
struct PoissonRegModel {
  std::vector<double> xi;
  double clip = 1.0;
};

/// Coordinatewise projection f applied to a finite Markov chain. projection[i]
/// is the observed symbol for base symbol i; the observed alphabet must be
/// strictly smaller than the base alphabet.
struct HiddenMarkovModel {
  MarkovModel base;
  std::vector<symbol_t> projection;

  std::uint32_t observed_alphabet() const {
    symbol_t m = 0;
    for (symbol_t b : projection) m = std::max(m, b);
    return m + 1;
  }
};

struct MixtureComponent {
  double weight = 0.0;
  MarkovModel kernel;
};

/// Convex mixture of finite-order Markov kernels, p(a|x) = sum_j w_j p^[j].
/// `weight0`/`base0` is the optional memoryless component; the literature is
/// ambiguous on whether the mixture index starts at 0 or 1, so both are
/// supported and weight0 = 0 recovers the pure j >= 1 form.
struct MixtureModel {
  std::uint32_t alphabet = 0;
  double weight0 = 0.0;
  std::vector<double> base0;
  std::vector<MixtureComponent> components;
};

using ProcessModel = std::variant<IidModel, MarkovModel, BinaryArModel,
                                  PoissonRegModel, HiddenMarkovModel, MixtureModel>;

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kProbSumTol = 1e-12;

inline void check_prob_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw std::invalid_argument(std::string(what) + ": empty probability vector");
  double s = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": probabilities must be finite and >= 0");
    }
    s += x;
  }
  if (std::abs(s - 1.0) > kProbSumTol) {
    throw std::invalid_argument(std::string(what) + ": probabilities must sum to 1 within 1e-12");
  }
}

inline void check_markov(const MarkovModel& m, const char* what) {
  if (m.alphabet < 1) throw std::invalid_argument(std::string(what) + ": alphabet size must be >= 1");
  if (m.order < 0) throw std::invalid_argument(std::string(what) + ": order must be >= 0");
  const std::size_t states = m.states();
  if (m.rows.size() != states * m.alphabet) {
    throw std::invalid_argument(std::string(what) + ": transition table has wrong shape");
  }
  for (std::size_t s = 0; s < states; ++s) {
    double sum = 0.0;
    for (std::uint32_t a = 0; a < m.alphabet; ++a) {
      const double x = m.row(s)[a];
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string(what) + ": transition entries must be finite and >= 0");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kProbSumTol) {
      throw std::invalid_argument(std::string(what) + ": each transition row must sum to 1 within 1e-12");
    }
  }
}

}  // namespace detail

inline void validate(const IidModel& m) { detail::check_prob_vector(m.probs, "iid model"); }

inline void validate(const MarkovModel& m) {
  if (m.order < 1) throw std::invalid_argument("markov model: order must be >= 1");
  detail::check_markov(m, "markov model");
}

inline void validate(const BinaryArModel& m) {
  if (!std::isfinite(m.xi0)) throw std::invalid_argument("binary_ar model: xi0 must be finite");
  for (double x : m.xi) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("binary_ar model: xi_j must be finite and >= 0");
    }
  }
}

inline void validate(const PoissonRegModel& m) {
  if (!(m.clip > 0.0) || !std::isfinite(m.clip)) {
    throw std::invalid_argument("poisson_reg model: clip threshold must be > 0");
  }
  for (double x : m.xi) {
    if (!(x <= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument("poisson_reg model: xi_j must be finite and <= 0");
    }
  }
}

inline void validate(const HiddenMarkovModel& m) {
  if (m.base.order < 1) throw std::invalid_argument("hidden_markov model: base order must be >= 1");
  detail::check_markov(m.base, "hidden_markov base");
  if (m.projection.size() != m.base.alphabet) {
    throw std::invalid_argument("hidden_markov model: projection must map every base symbol");
  }
  if (m.observed_alphabet() >= m.base.alphabet) {
    throw std::invalid_argument("hidden_markov model: observed alphabet must be smaller than the base alphabet");
  }
}

inline void validate(const MixtureModel& m) {
  if (m.alphabet < 1) throw std::invalid_argument("mixture model: alphabet size must be >= 1");
  double wsum = m.weight0;
  if (!(m.weight0 >= 0.0)) throw std::invalid_argument("mixture model: weight0 must be >= 0");
  if (m.weight0 > 0.0) {
    if (m.base0.size() != m.alphabet) {
      throw std::invalid_argument("mixture model: order-0 component has wrong alphabet");
    }
    detail::check_prob_vector(m.base0, "mixture order-0 component");
  }
  if (m.components.empty() && m.weight0 == 0.0) {
    throw std::invalid_argument("mixture model: no components");
  }
  for (const auto& c : m.components) {
    if (!(c.weight >= 0.0)) throw std::invalid_argument("mixture model: weights must be >= 0");
    if (c.kernel.order < 1) throw std::invalid_argument("mixture model: component orders must be >= 1");
    if (c.kernel.alphabet != m.alphabet) {
      throw std::invalid_argument("mixture model: component alphabet mismatch");
    }
    detail::check_markov(c.kernel, "mixture component");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > detail::kProbSumTol) {
    throw std::invalid_argument("mixture model: weights must sum to 1 within 1e-12");
  }
}

inline void validate(const ProcessModel& m) {
  std::visit([](const auto& x) { validate(x); }, m);
}

// ---------------------------------------------------------------------------
// Shared structural queries
// ---------------------------------------------------------------------------

inline Alphabet alphabet_of(const ProcessModel& m) {
  struct V {
    Alphabet operator()(const IidModel& x) const {
      return {static_cast<std::uint32_t>(x.probs.size()), false, {}};
    }
    Alphabet operator()(const MarkovModel& x) const { return {x.alphabet, false, {}}; }
    Alphabet operator()(const BinaryArModel&) const { return {2, false, {}}; }
    Alphabet operator()(const PoissonRegModel&) const { return {0, true, {}}; }
    Alphabet operator()(const HiddenMarkovModel& x) const { return {x.observed_alphabet(), false, {}}; }
    Alphabet operator()(const MixtureModel& x) const { return {x.alphabet, false, {}}; }
  };
  return std::visit(V{}, m);
}

/// Length of past the kernel actually reads (truncation memory for the
/// finite-parameter autoregressive families).
inline int memory_of(const ProcessModel& m) {
  struct V {
    int operator()(const IidModel&) const { return 0; }
    int operator()(const MarkovModel& x) const { return x.order; }
    int operator()(const BinaryArModel& x) const { return static_cast<int>(x.xi.size()); }
    int operator()(const PoissonRegModel& x) const { return static_cast<int>(x.xi.size()); }
    int operator()(const HiddenMarkovModel& x) const { return x.base.order; }
    int operator()(const MixtureModel& x) const {
      int k = 0;
      for (const auto& c : x.components) k = std::max(k, c.kernel.order);
      return k;
    }
  };
  return std::visit(V{}, m);
}

// ---------------------------------------------------------------------------
// Left conditional kernel
// ---------------------------------------------------------------------------

namespace detail {

/// Base-A numeral of the last `order` entries of `past` (chronological,
/// oldest most significant). Pasts shorter than `order` are left-padded with
/// symbol 0; this only ever matters during burn-in.
inline std::size_t context_index(std::span<const symbol_t> past, std::uint32_t alphabet, int order) {
  std::size_t idx = 0;
  for (int j = order; j >= 1; --j) {
    const std::size_t pos = past.size() >= static_cast<std::size_t>(j)
                                ? past.size() - static_cast<std::size_t>(j)
                                : std::numeric_limits<std::size_t>::max();
    const symbol_t a = pos == std::numeric_limits<std::size_t>::max() ? 0 : past[pos];
    if (a >= alphabet) throw std::invalid_argument("past contains a symbol outside the alphabet");
    idx = idx * alphabet + a;
  }
  return idx;
}

inline double binary_ar_link(double u) { return 1.0 / (1.0 + std::exp(-2.0 * u)); }

inline double binary_ar_field(const BinaryArModel& m, std::span<const symbol_t> past) {
  double u = m.xi0;
  for (std::size_t j = 1; j <= m.xi.size(); ++j) {
    symbol_t a = 0;  // absent past entries are the designated symbol 0 (= -1)
    if (past.size() >= j) {
      a = past[past.size() - j];
      if (a >= 2) throw std::invalid_argument("binary_ar past must be over symbols {0,1}");
    }
    u += m.xi[j - 1] * (a == 1 ? 1.0 : -1.0);
  }
  return u;
}

inline double poisson_mean(const PoissonRegModel& m, std::span<const symbol_t> past) {
  double e = 0.0;
  for (std::size_t j = 1; j <= m.xi.size(); ++j) {
    const double a = past.size() >= j ? static_cast<double>(past[past.size() - j]) : 0.0;
    e += m.xi[j - 1] * std::min(a, m.clip);
  }
  return std::exp(e);
}

inline constexpr double kPoissonTruncationMass = 1e-12;

/// Poisson masses appended to `out` until cumulative mass >= 1 - 1e-12.
inline void poisson_masses(double v, std::vector<double>& out) {
  out.clear();
  double mass = std::exp(-v);
  double cum = mass;
  out.push_back(mass);
  for (std::uint32_t a = 1; cum < 1.0 - kPoissonTruncationMass; ++a) {
    mass *= v / a;
    cum += mass;
    out.push_back(mass);
    if (a > 1000000) throw std::runtime_error("poisson mass truncation failed to converge");
  }
}

/// Fills `out` with the next-symbol law for any finite-alphabet family.
inline void finite_next_masses(const ProcessModel& model, std::span<const symbol_t> past,
                               std::vector<double>& out);

inline void mixture_next_masses(const MixtureModel& m, std::span<const symbol_t> past,
                                std::vector<double>& out) {
  out.assign(m.alphabet, 0.0);
  if (m.weight0 > 0.0) {
    for (std::uint32_t a = 0; a < m.alphabet; ++a) out[a] = m.weight0 * m.base0[a];
  }
  for (const auto& c : m.components) {
    const double* row = c.kernel.row(context_index(past, m.alphabet, c.kernel.order));
    for (std::uint32_t a = 0; a < m.alphabet; ++a) out[a] += c.weight * row[a];
  }
}

}  // namespace detail

/// Next-symbol distribution as a dense mass vector. For the count-valued
/// Poisson family the vector is the lazily accumulated prefix of the mass
/// function up to the explicit truncation point (cumulative mass
/// >= 1 - 1e-12) and `truncated` is set.
struct NextDistribution {
  std::vector<double> masses;
  bool truncated = false;

  double mass(symbol_t a) const { return a < masses.size() ? masses[a] : 0.0; }

  /// Inverse-CDF draw: smallest id whose cumulative mass exceeds u, symbols
  /// enumerated in id order. u beyond the accumulated mass (probability
  /// <= 1e-12 for truncated laws) maps to the last stored symbol.
  symbol_t sample(double u) const {
    double cum = 0.0;
    for (std::size_t a = 0; a < masses.size(); ++a) {
      cum += masses[a];
      if (u < cum) return static_cast<symbol_t>(a);
    }
    return static_cast<symbol_t>(masses.size() - 1);
  }
};

namespace detail {

// Forward filter for the hidden chain over base contexts: alpha(ctx) is the
// conditional law of the last `order` base symbols given the observed window,
// initialised from the stationary context law just before the window starts.
// For a given finite past this is the exact conditional of the observed
// process under stationarity.
std::vector<double> stationary_distribution_of(const MarkovModel& m);

inline void hidden_markov_next_masses(const HiddenMarkovModel& m, std::span<const symbol_t> past,
                                      std::vector<double>& out) {
  const std::uint32_t A = m.base.alphabet;
  const std::uint32_t B = m.observed_alphabet();
  const std::size_t states = m.base.states();
  if (states > 1000000) {
    throw std::invalid_argument("hidden_markov kernel: base context space too large");
  }
  std::vector<double> alpha = stationary_distribution_of(m.base);
  std::vector<double> next(states);
  const std::size_t mod = states;
  for (symbol_t y : past) {
    if (y >= B) throw std::invalid_argument("past contains a symbol outside the observed alphabet");
    std::fill(next.begin(), next.end(), 0.0);
    double norm = 0.0;
    for (std::size_t ctx = 0; ctx < states; ++ctx) {
      if (alpha[ctx] == 0.0) continue;
      const double* row = m.base.row(ctx);
      for (std::uint32_t a = 0; a < A; ++a) {
        if (m.projection[a] != y || row[a] == 0.0) continue;
        const double w = alpha[ctx] * row[a];
        next[(ctx * A + a) % mod] += w;
        norm += w;
      }
    }
    if (norm <= 0.0) {
      throw std::invalid_argument("observed past has zero probability under the base chain");
    }
    for (std::size_t ctx = 0; ctx < states; ++ctx) alpha[ctx] = next[ctx] / norm;
  }
  out.assign(B, 0.0);
  for (std::size_t ctx = 0; ctx < states; ++ctx) {
    if (alpha[ctx] == 0.0) continue;
    const double* row = m.base.row(ctx);
    for (std::uint32_t a = 0; a < A; ++a) out[m.projection[a]] += alpha[ctx] * row[a];
  }
}

inline void finite_next_masses(const ProcessModel& model, std::span<const symbol_t> past,
                               std::vector<double>& out) {
  struct V {
    std::span<const symbol_t> past;
    std::vector<double>& out;
    void operator()(const IidModel& m) const { out.assign(m.probs.begin(), m.probs.end()); }
    void operator()(const MarkovModel& m) const {
      const double* row = m.row(context_index(past, m.alphabet, m.order));
      out.assign(row, row + m.alphabet);
    }
    void operator()(const BinaryArModel& m) const {
      const double u = binary_ar_field(m, past);
      out.assign({binary_ar_link(-u), binary_ar_link(u)});
    }
    void operator()(const PoissonRegModel&) const {
      throw std::logic_error("finite_next_masses called on an unbounded-alphabet model");
    }
    void operator()(const HiddenMarkovModel& m) const { hidden_markov_next_masses(m, past, out); }
    void operator()(const MixtureModel& m) const { mixture_next_masses(m, past, out); }
  };
  std::visit(V{past, out}, model);
}

}  // namespace detail

inline NextDistribution kernel_next_distribution(const ProcessModel& model,
                                                 std::span<const symbol_t> past) {
  NextDistribution d;
  if (const auto* p = std::get_if<PoissonRegModel>(&model)) {
    detail::poisson_masses(detail::poisson_mean(*p, past), d.masses);
    d.truncated = true;
    return d;
  }
  const Alphabet a = alphabet_of(model);
  for (symbol_t s : past) {
    if (!a.contains(s)) throw std::invalid_argument("past contains a symbol outside the alphabet");
  }
  detail::finite_next_masses(model, past, d.masses);
  return d;
}

// ---------------------------------------------------------------------------
// Order-lifted dense kernel and stationary distribution
// ---------------------------------------------------------------------------

namespace detail {

/// Dense order-k conditional table for the finite families, used to compute
/// stationary laws. The state chain lives on A^k contexts with update
/// context' = (context * A + a) mod A^k.
struct LiftedKernel {
  std::uint32_t alphabet = 0;
  int order = 0;
  std::vector<double> rows;  // A^order x A

  std::size_t states() const {
    return checked_pow(alphabet, static_cast<std::size_t>(order),
                       std::numeric_limits<std::size_t>::max() / 2);
  }
  const double* row(std::size_t s) const { return rows.data() + s * alphabet; }
};

inline LiftedKernel lift(const ProcessModel& model, std::size_t budget) {
  LiftedKernel lk;
  if (const auto* iid = std::get_if<IidModel>(&model)) {
    lk.alphabet = static_cast<std::uint32_t>(iid->probs.size());
    lk.order = 0;
    lk.rows = iid->probs;
    return lk;
  }
  if (const auto* mk = std::get_if<MarkovModel>(&model)) {
    lk.alphabet = mk->alphabet;
    lk.order = mk->order;
    lk.rows = mk->rows;
    return lk;
  }
  if (const auto* mix = std::get_if<MixtureModel>(&model)) {
    lk.alphabet = mix->alphabet;
    lk.order = 0;
    for (const auto& c : mix->components) lk.order = std::max(lk.order, c.kernel.order);
    const std::size_t states = checked_pow(lk.alphabet, static_cast<std::size_t>(lk.order), budget);
    if (states > budget) throw std::invalid_argument("mixture lift exceeds the enumeration budget");
    lk.rows.resize(states * lk.alphabet);
    std::vector<symbol_t> ctx(static_cast<std::size_t>(lk.order), 0);
    std::vector<double> masses;
    for (std::size_t s = 0; s < states; ++s) {
      std::size_t v = s;
      for (int j = lk.order - 1; j >= 0; --j) {
        ctx[static_cast<std::size_t>(j)] = static_cast<symbol_t>(v % lk.alphabet);
        v /= lk.alphabet;
      }
      mixture_next_masses(*mix, ctx, masses);
      std::copy(masses.begin(), masses.end(), lk.rows.begin() + static_cast<std::ptrdiff_t>(s * lk.alphabet));
    }
    return lk;
  }
  throw std::invalid_argument("exact laws are only available for iid, markov, mixture and hidden_markov models");
}

/// Number of closed communicating classes of the positive-transition digraph.
/// A unique stationary distribution exists iff there is exactly one.
inline int closed_class_count(const LiftedKernel& lk) {
  const std::size_t n = lk.states();
  const std::uint32_t A = lk.alphabet;
  auto succ_state = [&](std::size_t s, std::uint32_t a) {
    return lk.order == 0 ? std::size_t{0} : (s * A + a) % n;
  };
  // Iterative Tarjan SCC.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<std::size_t> stack;
  int next_index = 0, comp_count = 0;
  struct Frame { std::size_t v; std::uint32_t edge; };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      bool descended = false;
      while (f.edge < A) {
        const std::uint32_t a = f.edge++;
        if (lk.row(f.v)[a] <= 0.0) continue;
        const std::size_t w = succ_state(f.v, a);
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      if (low[f.v] == index[f.v]) {
        while (true) {
          const std::size_t w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = comp_count;
          if (w == f.v) break;
        }
        ++comp_count;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  std::vector<char> closed(static_cast<std::size_t>(comp_count), 1);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::uint32_t a = 0; a < A; ++a) {
      if (lk.row(v)[a] <= 0.0) continue;
      const std::size_t w = succ_state(v, a);
      if (comp[w] != comp[v]) closed[static_cast<std::size_t>(comp[v])] = 0;
    }
  }
  int count = 0;
  for (char c : closed) count += c;
  return count;
}

/// Stationary law of the lifted state chain: damped power iteration
/// pi' = (pi + pi P)/2 from the uniform start, fixed-point tolerance 1e-13,
/// at most 1e6 iterations. The damping keeps periodic chains convergent
/// without moving the fixed point.
inline std::vector<double> stationary_state_distribution(const LiftedKernel& lk) {
  const std::size_t n = lk.states();
  const std::uint32_t A = lk.alphabet;
  if (lk.order == 0) return {1.0};
  if (closed_class_count(lk) != 1) {
    throw std::invalid_argument("no unique stationary distribution (chain is not ergodic)");
  }
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  const std::size_t mod = n;
  for (long iter = 0; iter < 1000000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double w = pi[s];
      if (w == 0.0) continue;
      const double* row = lk.row(s);
      const std::size_t base = (s * A) % mod;
      for (std::uint32_t a = 0; a < A; ++a) next[(base + a) % mod] += w * row[a];
    }
    double diff = 0.0, norm = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      next[s] = 0.5 * (next[s] + pi[s]);
      diff = std::max(diff, std::abs(next[s] - pi[s]));
      norm += next[s];
    }
    for (double& v : next) v /= norm;  // guard drift
    pi.swap(next);
    if (diff < 1e-13) return pi;
  }
  throw std::runtime_error("stationary distribution iteration failed to converge");
}

inline std::vector<double> stationary_distribution_of(const MarkovModel& m) {
  LiftedKernel lk{m.alphabet, m.order, m.rows};
  return stationary_state_distribution(lk);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact finite-dimensional laws
// ---------------------------------------------------------------------------

/// Stationary joint law of X_F for an index set F. `positions` is F shifted
/// to min = 1; patterns absent from `probs` have zero mass. `exhaustive` is
/// false only for truncated views of unbounded-alphabet laws, in which case
/// `alphabet` is the truncation point used for enumeration.
struct ExactLaw {
  std::vector<int> positions;
  std::uint32_t alphabet = 0;
  bool exhaustive = true;
  std::map<pattern_t, double> probs;

  double mass(const pattern_t& p) const {
    auto it = probs.find(p);
    return it == probs.end() ? 0.0 : it->second;
  }
};

inline constexpr std::size_t kDefaultEnumerationBudget = 10000000;

inline ExactLaw exact_finite_law(const ProcessModel& model, std::vector<int> F,
                                 std::size_t budget = kDefaultEnumerationBudget) {
  validate(model);
  if (const auto* hmm = std::get_if<HiddenMarkovModel>(&model)) {
    ExactLaw base = exact_finite_law(ProcessModel{hmm->base}, std::move(F), budget);
    ExactLaw law;
    law.positions = base.positions;
    law.alphabet = hmm->observed_alphabet();
    pattern_t img;
    for (const auto& [pat, p] : base.probs) {
      img.resize(pat.size());
      for (std::size_t i = 0; i < pat.size(); ++i) img[i] = hmm->projection[pat[i]];
      law.probs[img] += p;
    }
    return law;
  }

  const Alphabet alpha = alphabet_of(model);
  if (alpha.unbounded) {
    throw std::invalid_argument("exact_finite_law requires a finite alphabet");
  }
  const std::vector<int> positions = normalize_positions(std::move(F));
  const std::uint32_t A = alpha.size;
  const int m = positions.back();
  if (checked_pow(A, static_cast<std::size_t>(m), budget) > budget) {
    throw std::invalid_argument("exact_finite_law enumeration budget exceeded");
  }

  const detail::LiftedKernel lk = detail::lift(model, budget);
  const std::vector<double> pi = detail::stationary_state_distribution(lk);
  const int k = lk.order;

  ExactLaw law;
  law.positions = positions;
  law.alphabet = A;

  pattern_t sub(positions.size());
  auto record = [&](const pattern_t& x, double p) {
    if (p <= 0.0) return;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      sub[i] = x[static_cast<std::size_t>(positions[i] - 1)];
    }
    law.probs[sub] += p;
  };

  if (m <= k) {
    // Marginal of the stationary k-tuple law over its leading m coordinates.
    const std::size_t drop = checked_pow(A, static_cast<std::size_t>(k - m), budget + 1);
    std::vector<double> marg(checked_pow(A, static_cast<std::size_t>(m), budget + 1), 0.0);
    for (std::size_t s = 0; s < pi.size(); ++s) marg[s / drop] += pi[s];
    pattern_t x(static_cast<std::size_t>(m), 0);
    std::size_t idx = 0;
    do {
      idx = 0;
      for (symbol_t a : x) idx = idx * A + a;
      record(x, marg[idx]);
    } while (next_pattern(x, A));
  } else {
    const std::size_t mod = pi.size();
    pattern_t x(static_cast<std::size_t>(m), 0);
    do {
      std::size_t ctx = 0;
      for (int t = 0; t < k; ++t) ctx = ctx * A + x[static_cast<std::size_t>(t)];
      double p = pi.empty() ? 1.0 : pi[k == 0 ? 0 : ctx];
      if (k == 0) ctx = 0;
      for (int t = k; t < m && p > 0.0; ++t) {
        const symbol_t a = x[static_cast<std::size_t>(t)];
        p *= lk.row(ctx)[a];
        ctx = k == 0 ? 0 : (ctx * A + a) % mod;
      }
      record(x, p);
    } while (next_pattern(x, A));
  }

  double total = 0.0;
  for (const auto& [pat, p] : law.probs) total += p;
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::runtime_error("exact_finite_law mass does not sum to 1");
  }
  return law;
}

/// Marginal of `law` on a subset of its (normalized) positions; the result is
/// renormalized to min position 1 so it compares against exact_finite_law of
/// the subset directly.
inline ExactLaw marginalize(const ExactLaw& law, std::vector<int> positions_subset) {
  const std::vector<int> sub = detail::sorted_unique(std::move(positions_subset), "marginal positions");
  std::vector<std::size_t> keep;
  for (int p : sub) {
    auto it = std::find(law.positions.begin(), law.positions.end(), p);
    if (it == law.positions.end()) {
      throw std::invalid_argument("marginalize: position not in the law's support");
    }
    keep.push_back(static_cast<std::size_t>(it - law.positions.begin()));
  }
  ExactLaw out;
  out.positions = normalize_positions(sub);
  out.alphabet = law.alphabet;
  out.exhaustive = law.exhaustive;
  pattern_t q(keep.size());
  for (const auto& [pat, p] : law.probs) {
    for (std::size_t i = 0; i < keep.size(); ++i) q[i] = pat[keep[i]];
    out.probs[q] += p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// p-bar, variation bounds and Gamma
// ---------------------------------------------------------------------------

/// sup_{a,x} p(a|x) where available. Exact for iid/markov (max entry), exact
/// for poisson_reg (attained at a = 0 on the all-large past), analytic upper
/// bounds for binary_ar and mixtures, unknown for hidden Markov chains.
inline std::optional<double> pbar(const ProcessModel& model) {
  struct V {
    std::optional<double> operator()(const IidModel& m) const {
      return *std::max_element(m.probs.begin(), m.probs.end());
    }
    std::optional<double> operator()(const MarkovModel& m) const {
      return *std::max_element(m.rows.begin(), m.rows.end());
    }
    std::optional<double> operator()(const BinaryArModel& m) const {
      double s = 0.0;
      for (double x : m.xi) s += x;
      return detail::binary_ar_link(std::abs(m.xi0) + s);
    }
    std::optional<double> operator()(const PoissonRegModel& m) const {
      double s = 0.0;
      for (double x : m.xi) s += x;
      return std::exp(-std::exp(m.clip * s));
    }
    std::optional<double> operator()(const HiddenMarkovModel&) const { return std::nullopt; }
    std::optional<double> operator()(const MixtureModel& m) const {
      double b = 0.0;
      if (m.weight0 > 0.0) b += m.weight0 * *std::max_element(m.base0.begin(), m.base0.end());
      for (const auto& c : m.components) {
        b += c.weight * *std::max_element(c.kernel.rows.begin(), c.kernel.rows.end());
      }
      return std::min(b, 1.0);
    }
  };
  return std::visit(V{}, model);
}

/// Upper bounds on Var_0..Var_{j_max} plus a bound on the tail sum
/// sum_{j > j_max} Var_j. All families here carry finitely many parameters,
/// so the tail bound is an exact finite sum.
struct VariationBounds {
  std::vector<double> var;
  double tail_sum = 0.0;
};

namespace detail {

inline double tv_distance(const double* p, const double* q, std::uint32_t n) {
  double s = 0.0;
  for (std::uint32_t a = 0; a < n; ++a) s += std::abs(p[a] - q[a]);
  return 0.5 * s;
}

/// Dobrushin-style coefficient constrained to context pairs that agree on
/// their last `agree` symbols (the low base-A digits).
inline double constrained_dobrushin(const MarkovModel& m, int agree) {
  const std::size_t states = m.states();
  const std::size_t suffixes = checked_pow(m.alphabet, static_cast<std::size_t>(agree), states);
  const std::size_t prefixes = states / suffixes;
  double best = 0.0;
  for (std::size_t suf = 0; suf < suffixes; ++suf) {
    for (std::size_t p1 = 0; p1 < prefixes; ++p1) {
      for (std::size_t p2 = p1 + 1; p2 < prefixes; ++p2) {
        const std::size_t c1 = p1 * suffixes + suf;
        const std::size_t c2 = p2 * suffixes + suf;
        best = std::max(best, tv_distance(m.row(c1), m.row(c2), m.alphabet));
      }
    }
  }
  return best;
}

inline std::vector<double> suffix_sums(const std::vector<double>& xs, bool absolute) {
  std::vector<double> s(xs.size() + 1, 0.0);
  for (std::size_t i = xs.size(); i-- > 0;) {
    s[i] = s[i + 1] + (absolute ? std::abs(xs[i]) : xs[i]);
  }
  return s;
}

}  // namespace detail

inline VariationBounds variation_sequence(const ProcessModel& model, int j_max) {
  if (j_max < 0) throw std::invalid_argument("variation_sequence: j_max must be >= 0");
  validate(model);
  VariationBounds vb;
  vb.var.assign(static_cast<std::size_t>(j_max) + 1, 0.0);

  struct V {
    int j_max;
    VariationBounds& vb;
    void operator()(const IidModel&) const {}
    void operator()(const MarkovModel& m) const {
      for (int j = 0; j <= std::min(j_max, m.order - 1); ++j) {
        vb.var[static_cast<std::size_t>(j)] = detail::constrained_dobrushin(m, j);
      }
    }
    void operator()(const BinaryArModel& m) const {
      // Var_j <= sum_{k > j} xi_k; the xi are a finite vector so everything
      // beyond it vanishes.
      const auto tail = detail::suffix_sums(m.xi, false);
      for (int j = 0; j <= j_max; ++j) {
        vb.var[static_cast<std::size_t>(j)] =
            static_cast<std::size_t>(j) < m.xi.size() ? tail[static_cast<std::size_t>(j)] : 0.0;
      }
      for (std::size_t j = static_cast<std::size_t>(j_max) + 1; j < m.xi.size(); ++j) {
        vb.tail_sum += tail[j];
      }
    }
    void operator()(const PoissonRegModel& m) const {
      // |v(x)-v(y)| <= clip * sum_{k>j} |xi_k| when x,y agree on the last j
      // coordinates (mean value theorem on the exponent, |exp'| <= 1 on
      // (-inf,0]); total variation between the two Poisson laws is bounded by
      // |v1-v2| via the monotone coupling, giving
      // Var_j <= (clip/2) * sum_{k>j} |xi_k|.
      const auto tail = detail::suffix_sums(m.xi, true);
      const double half_clip = 0.5 * m.clip;
      for (int j = 0; j <= j_max; ++j) {
        vb.var[static_cast<std::size_t>(j)] =
            static_cast<std::size_t>(j) < m.xi.size() ? half_clip * tail[static_cast<std::size_t>(j)] : 0.0;
      }
      for (std::size_t j = static_cast<std::size_t>(j_max) + 1; j < m.xi.size(); ++j) {
        vb.tail_sum += half_clip * tail[j];
      }
    }
    void operator()(const HiddenMarkovModel&) const {
      throw std::invalid_argument(
          "variation_sequence: no analytic bound for hidden Markov models (empirical only)");
    }
    void operator()(const MixtureModel& m) const {
      // Var_j <= total weight of components that still read past position j.
      int max_order = 0;
      for (const auto& c : m.components) max_order = std::max(max_order, c.kernel.order);
      for (int j = 0; j < max_order; ++j) {
        double w = 0.0;
        for (const auto& c : m.components) {
          if (c.kernel.order > j) w += c.weight;
        }
        if (j <= j_max) {
          vb.var[static_cast<std::size_t>(j)] = w;
        } else {
          vb.tail_sum += w;
        }
      }
    }
  };
  std::visit(V{j_max, vb}, model);
  return vb;
}

/// Lower bound on Gamma(P) = prod_j (1 - Var_j). `truncated_product` is the
/// product over the supplied bounds alone; `lower_bound` additionally pays for
/// the tail via the Weierstrass inequality prod(1-v) >= 1 - sum v. When any
/// variation bound reaches 1 the assumption cannot be verified and `violated`
/// is set instead of throwing.
struct GammaBound {
  double truncated_product = 0.0;
  double lower_bound = 0.0;
  bool violated = false;
};

inline GammaBound gamma_from_variations(const VariationBounds& vb) {
  GammaBound g;
  double prod = 1.0;
  for (double v : vb.var) {
    if (v < 0.0) throw std::invalid_argument("variation bounds must be >= 0");
    if (v >= 1.0) {
      g.violated = true;
      return g;
    }
    prod *= 1.0 - v;
  }
  g.truncated_product = prod;
  g.lower_bound = prod * std::max(0.0, 1.0 - vb.tail_sum);
  return g;
}

/// Natural truncation depth: the index past which every family's variation
/// bound is exactly zero.
inline int natural_variation_depth(const ProcessModel& model) {
  return std::max(1, memory_of(model));
}

inline GammaBound gamma_bound(const ProcessModel& model, int j_max = -1) {
  if (j_max < 0) j_max = natural_variation_depth(model);
  return gamma_from_variations(variation_sequence(model, j_max));
}

// ---------------------------------------------------------------------------
// Convenience constructors
// ---------------------------------------------------------------------------

inline IidModel make_iid(std::vector<double> probs) {
  IidModel m{std::move(probs)};
  validate(m);
  return m;
}

inline MarkovModel make_markov(const std::vector<std::vector<double>>& rows, int order = 1) {
  MarkovModel m;
  m.order = order;
  m.alphabet = rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().size());
  for (const auto& r : rows) {
    if (r.size() != m.alphabet) throw std::invalid_argument("markov rows must have equal length");
    m.rows.insert(m.rows.end(), r.begin(), r.end());
  }
  validate(m);
  return m;
}

}  // namespace pathguess
