#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pathguess/models.hpp"
#include "pathguess/rng.hpp"

namespace pathguess {

/// Fully specifies one trajectory: identical plans produce identical samples
/// on every platform and at every parallelism degree.
struct SimulationPlan {
  ProcessModel model;
  long long n = 0;
  std::uint64_t seed = 0;
  long long burn_in = 0;
  int memory = -1;  // past-window truncation M; -1 = model's natural memory
};

/// Smallest B with ((1-Gamma)/Gamma) * (1-Gamma)^B <= tol under the geometric
/// proxy rate 1-Gamma. Only the summed coupling bound (1-Gamma)/Gamma is
/// available, not a per-step rate, so the proxy is a documented choice and
/// SimulationPlan::burn_in overrides it. Finite-memory models return at
/// least their order.
inline long long default_burn_in(const ProcessModel& model, double tol = 1e-6) {
  if (!(tol > 0.0)) throw std::invalid_argument("default_burn_in: tol must be > 0");
  GammaBound g;
  if (const auto* hmm = std::get_if<HiddenMarkovModel>(&model)) {
    g = gamma_bound(ProcessModel{hmm->base});  // burn-in acts on the base chain
  } else {
    g = gamma_bound(model);
  }
  if (g.violated || !(g.lower_bound > 0.0)) {
    throw std::invalid_argument("default_burn_in: Gamma lower bound is 0");
  }
  const double gamma = std::min(g.lower_bound, 1.0);
  long long b = 0;
  if (gamma < 1.0) {
    const double target = tol * gamma / (1.0 - gamma);
    if (target < 1.0) {
      b = static_cast<long long>(std::ceil(std::log(target) / std::log(1.0 - gamma)));
      if (b < 0) b = 0;
    }
  }
  return std::max<long long>(b, memory_of(model));
}

namespace detail {

inline symbol_t inverse_cdf(const std::vector<double>& masses, double u) {
  double cum = 0.0;
  for (std::size_t a = 0; a < masses.size(); ++a) {
    cum += masses[a];
    if (u < cum) return static_cast<symbol_t>(a);
  }
  return static_cast<symbol_t>(masses.size() - 1);
}

/// Inverse-CDF draw from Poisson(v): accumulate masses in id order until the
/// target u is bracketed. No truncation is involved here, so sampling is
/// exact up to floating point.
inline symbol_t poisson_inverse_cdf(double v, double u) {
  double mass = std::exp(-v);
  double cum = mass;
  symbol_t a = 0;
  while (u >= cum) {
    ++a;
    mass *= v / a;
    cum += mass;
    if (a > 100000000u) throw std::runtime_error("poisson sampling failed to bracket the target");
  }
  return a;
}

}  // namespace detail

inline sample_t simulate(const SimulationPlan& plan) {
  validate(plan.model);
  if (plan.n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (plan.burn_in < 0) throw std::invalid_argument("simulate: burn_in must be >= 0");

  if (const auto* hmm = std::get_if<HiddenMarkovModel>(&plan.model)) {
    SimulationPlan base_plan{ProcessModel{hmm->base}, plan.n, plan.seed, plan.burn_in, plan.memory};
    sample_t base = simulate(base_plan);
    for (symbol_t& s : base) s = hmm->projection[s];
    return base;
  }

  const int natural = std::max(1, memory_of(plan.model));
  const int memory = plan.memory < 1 ? natural : plan.memory;
  const long long total = plan.burn_in + plan.n;

  // Initial past is all symbol 0; burn-in washes it out whenever the
  // Gamma > 0 mixing assumption holds.
  std::vector<symbol_t> past(static_cast<std::size_t>(memory), 0);
  std::size_t head = 0;  // ring buffer cursor: oldest entry
  std::vector<symbol_t> ordered(static_cast<std::size_t>(memory));
  Xoshiro256pp rng(plan.seed);
  sample_t out;
  out.reserve(static_cast<std::size_t>(plan.n));

  const auto* poisson = std::get_if<PoissonRegModel>(&plan.model);
  std::vector<double> masses;

  for (long long t = 0; t < total; ++t) {
    for (std::size_t i = 0; i < past.size(); ++i) {
      ordered[i] = past[(head + i) % past.size()];
    }
    const double u = rng.uniform();
    symbol_t next;
    if (poisson != nullptr) {
      next = detail::poisson_inverse_cdf(detail::poisson_mean(*poisson, ordered), u);
    } else {
      detail::finite_next_masses(plan.model, ordered, masses);
      next = detail::inverse_cdf(masses, u);
    }
    past[head] = next;
    head = (head + 1) % past.size();
    if (t >= plan.burn_in) out.push_back(next);
  }
  return out;
}

}  // namespace pathguess
