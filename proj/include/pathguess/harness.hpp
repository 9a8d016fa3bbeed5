#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathguess/analysis.hpp"
#include "pathguess/estimator.hpp"
#include "pathguess/gibbs.hpp"
#include "pathguess/models.hpp"
#include "pathguess/parallel.hpp"
#include "pathguess/sampler.hpp"
#include "pathguess/version.hpp"

namespace pathguess::harness {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Model (de)serialization
// ---------------------------------------------------------------------------

namespace detail {

inline const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw std::invalid_argument(std::string("config: missing field '") + key + "'");
  }
  return *it;
}

inline MarkovModel markov_from_json(const json& j) {
  MarkovModel m;
  m.order = j.value("order", 1);
  const auto& rows = require(j, "rows");
  if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
    throw std::invalid_argument("config: markov rows must be a non-empty array of arrays");
  }
  m.alphabet = static_cast<std::uint32_t>(rows.front().size());
  for (const auto& r : rows) {
    if (r.size() != m.alphabet) throw std::invalid_argument("config: markov rows must have equal length");
    for (const auto& x : r) m.rows.push_back(x.get<double>());
  }
  validate(m);
  return m;
}

}  // namespace detail

inline ProcessModel model_from_json(const json& j) {
  const std::string family = detail::require(j, "family").get<std::string>();
  if (family == "iid") {
    IidModel m{detail::require(j, "probs").get<std::vector<double>>()};
    validate(m);
    return m;
  }
  if (family == "markov") return detail::markov_from_json(j);
  if (family == "binary_ar") {
    BinaryArModel m;
    m.xi0 = detail::require(j, "xi0").get<double>();
    m.xi = detail::require(j, "xi").get<std::vector<double>>();
    validate(m);
    return m;
  }
  if (family == "poisson_reg") {
    PoissonRegModel m;
    m.xi = detail::require(j, "xi").get<std::vector<double>>();
    m.clip = detail::require(j, "clip").get<double>();
    validate(m);
    return m;
  }
  if (family == "hidden_markov") {
    HiddenMarkovModel m;
    m.base = detail::markov_from_json(detail::require(j, "base"));
    m.projection = detail::require(j, "projection").get<std::vector<symbol_t>>();
    validate(m);
    return m;
  }
  if (family == "mixture") {
    MixtureModel m;
    m.alphabet = detail::require(j, "alphabet").get<std::uint32_t>();
    m.weight0 = j.value("weight0", 0.0);
    if (j.contains("base0")) m.base0 = j["base0"].get<std::vector<double>>();
    for (const auto& c : detail::require(j, "components")) {
      MixtureComponent comp;
      comp.weight = detail::require(c, "weight").get<double>();
      comp.kernel = detail::markov_from_json(c);
      m.components.push_back(std::move(comp));
    }
    validate(m);
    return m;
  }
  throw std::invalid_argument("config: unknown model family '" + family + "'");
}

inline json model_to_json(const ProcessModel& model) {
  json j;
  struct V {
    json& j;
    void operator()(const IidModel& m) const {
      j["family"] = "iid";
      j["probs"] = m.probs;
    }
    void operator()(const MarkovModel& m) const {
      j["family"] = "markov";
      j["order"] = m.order;
      json rows = json::array();
      const std::size_t states = m.states();
      for (std::size_t s = 0; s < states; ++s) {
        rows.push_back(std::vector<double>(m.row(s), m.row(s) + m.alphabet));
      }
      j["rows"] = std::move(rows);
    }
    void operator()(const BinaryArModel& m) const {
      j["family"] = "binary_ar";
      j["xi0"] = m.xi0;
      j["xi"] = m.xi;
    }
    void operator()(const PoissonRegModel& m) const {
      j["family"] = "poisson_reg";
      j["xi"] = m.xi;
      j["clip"] = m.clip;
    }
    void operator()(const HiddenMarkovModel& m) const {
      j["family"] = "hidden_markov";
      json base;
      V{base}(m.base);
      j["base"] = std::move(base);
      j["projection"] = m.projection;
    }
    void operator()(const MixtureModel& m) const {
      j["family"] = "mixture";
      j["alphabet"] = m.alphabet;
      if (m.weight0 > 0.0) {
        j["weight0"] = m.weight0;
        j["base0"] = m.base0;
      }
      json comps = json::array();
      for (const auto& c : m.components) {
        json cj;
        V{cj}(c.kernel);
        cj["weight"] = c.weight;
        comps.push_back(std::move(cj));
      }
      j["components"] = std::move(comps);
    }
  };
  std::visit(V{j}, model);
  return j;
}

/// Model specification inside an experiment: either a fixed model or the
/// n-indexed margin family P_n = (1/2 + coef/sqrt(n), 1/2 - coef/sqrt(n)).
struct ModelSpec {
  json raw;
  bool margin_family = false;
  double margin_coef = 0.125;

  ProcessModel instantiate(long long n) const {
    if (!margin_family) return model_from_json(raw);
    const double eps = margin_coef / std::sqrt(static_cast<double>(n));
    if (!(eps > 0.0 && eps < 0.5)) {
      throw std::invalid_argument("margin_binary: coef/sqrt(n) must be in (0, 0.5)");
    }
    return IidModel{{0.5 + eps, 0.5 - eps}};
  }
};

inline ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  spec.raw = j;
  if (detail::require(j, "family").get<std::string>() == "margin_binary") {
    spec.margin_family = true;
    spec.margin_coef = j.value("coef", 0.125);
    if (!(spec.margin_coef > 0.0)) throw std::invalid_argument("margin_binary: coef must be > 0");
  } else {
    model_from_json(j);  // validate eagerly
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Report serialization (objects are std::map-backed, so keys come out sorted)
// ---------------------------------------------------------------------------

inline json meta_json(const std::string& config_hash, std::uint64_t seed) {
  json m;
  m["tool"] = kToolId;
  m["config_hash"] = config_hash;
  m["seed"] = seed;
  return m;
}

inline json to_json(const IndexPair& pair) {
  json j;
  j["D"] = pair.data;
  j["G"] = pair.guess;
  j["L"] = pair.span;
  j["K"] = pair.symbols;
  j["offset"] = pair.offset;
  return j;
}

inline json to_json(const CountTable& t) {
  json j;
  j["pair"] = to_json(t.pair);
  j["windows"] = t.windows;
  json joint = json::array();
  for (const auto& [b, amap] : t.joint) {
    for (const auto& [a, c] : amap) {
      joint.push_back(json{{"b", b}, {"a", a}, {"count", c}});
    }
  }
  j["joint"] = std::move(joint);
  json marginal = json::array();
  for (const auto& [b, c] : t.data_marginal) {
    marginal.push_back(json{{"b", b}, {"count", c}});
  }
  j["data_marginal"] = std::move(marginal);
  return j;
}

inline json to_json(const GuessRule& r) {
  json j;
  j["pair"] = to_json(r.pair);
  json table = json::array();
  for (const auto& [b, a] : r.table) table.push_back(json{{"b", b}, {"a", a}});
  j["table"] = std::move(table);
  j["fallback"] = r.fallback;
  json ties = json::array();
  for (const auto& b : r.tie_broken) ties.push_back(b);
  j["tie_broken"] = std::move(ties);
  return j;
}

inline json to_json(const RiskReport& r) {
  json j;
  j["value"] = r.value;
  j["achieving_b"] = r.achieving_b;
  json per_b = json::array();
  for (const auto& [b, v] : r.per_b) per_b.push_back(json{{"b", b}, {"regret", v}});
  j["per_b"] = std::move(per_b);
  return j;
}

inline json to_json(const McRiskSummary& s) {
  json j;
  j["mean"] = s.mean;
  j["se"] = s.se;
  j["q05"] = s.q05;
  j["q95"] = s.q95;
  j["replicates"] = s.replicates;
  return j;
}

inline json to_json(const BoundReport& r) {
  json j;
  j["gamma"] = r.gamma;
  j["delta"] = r.delta;
  j["beta"] = r.beta;
  j["epsilon"] = r.epsilon;
  j["required_n"] = r.required_n;
  j["guaranteed_by_beta"] = r.guaranteed_by_beta;
  j["regime"] = to_string(r.regime);
  j["regime_bound"] = r.regime_bound;
  j["dkw_u"] = r.dkw_u;
  j["dkw_threshold"] = r.dkw_threshold;
  j["dkw_tail"] = r.dkw_tail;
  j["lower_bound"] = r.lower_bound;
  j["lower_bound_half"] = r.lower_bound_half;
  return j;
}

inline json to_json(const LeCamPair& p) {
  json j;
  j["p0"] = p.p0.probs;
  j["p1"] = p.p1.probs;
  j["perturbation"] = p.perturbation;
  j["a0"] = p.a0;
  j["a1"] = p.a1;
  j["chi2_step"] = p.chi2_step;
  j["kl_bound"] = p.kl_bound;
  j["minimax_value"] = p.minimax_value;
  return j;
}

inline json to_json(const GibbsReport& r) {
  json j;
  json vb = json::array();
  for (double v : r.var_bounds) {
    if (std::isfinite(v)) {
      vb.push_back(v);
    } else {
      vb.push_back("inf");
    }
  }
  j["var_bounds"] = std::move(vb);
  j["n_star"] = r.n_star;
  j["gamma_lower"] = r.gamma_lower;
  j["convergent"] = r.convergent;
  j["note"] = r.note;
  return j;
}

// ---------------------------------------------------------------------------
// Config hash and number formatting
// ---------------------------------------------------------------------------

inline std::string config_hash(const json& config) {
  const std::string s = config.dump();  // objects are sorted; dump is canonical
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  // shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    std::ostringstream t;
    t.precision(prec);
    t << v;
    double back = 0.0;
    std::istringstream(t.str()) >> back;
    if (back == v) return t.str();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Sample file format
// ---------------------------------------------------------------------------

inline void write_sample(std::ostream& os, const sample_t& sample, std::uint64_t seed,
                         const std::string& hash) {
  os << "# pathguess-sample v1 n=" << sample.size() << "\n";
  os << "# tool=" << kToolId << " seed=" << seed << " config_hash=" << hash << "\n";
  for (symbol_t s : sample) os << s << "\n";
}

inline sample_t read_sample(std::istream& is) {
  sample_t out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    long long v = 0;
    while (ls >> v) {
      if (v < 0) throw std::invalid_argument("sample file: negative symbol id");
      out.push_back(static_cast<symbol_t>(v));
    }
  }
  if (out.empty()) throw std::invalid_argument("sample file: no symbols");
  return out;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  json raw;
  ModelSpec model;
  std::vector<int> D, G;
  std::vector<long long> n_grid;
  long long replicates = 1;
  std::uint64_t seed = 0;
  long long burn_in = -1;  // -1 = auto
  double epsilon = 0.1;
  bool do_risk = true;
  bool do_bounds = true;
  bool do_dkw = false;
  bool do_lecam = false;
  bool do_gibbs = false;
  bool regime_fixed_label = false;  // annotate rows of a constant-margin family
  std::vector<double> dkw_u{0.05, 0.1, 0.2};
  std::uint32_t lecam_alphabet = 2;
  std::string lecam_regime = "root_n";
  double lecam_delta_n = 0.0;
  double gibbs_alpha = 4.0;
  std::uint32_t gibbs_alphabet = 2;
  int gibbs_k_max = 10;
  std::string out_csv;
  std::string out_json;
};

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.raw = j;
  c.model = model_spec_from_json(detail::require(j, "model"));
  const json& pair = detail::require(j, "pair");
  c.D = pair.value("D", std::vector<int>{});
  c.G = detail::require(pair, "G").get<std::vector<int>>();
  c.n_grid = detail::require(j, "n_grid").get<std::vector<long long>>();
  if (c.n_grid.empty()) throw std::invalid_argument("config: n_grid must be non-empty");
  for (std::size_t i = 1; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] <= c.n_grid[i - 1]) {
      throw std::invalid_argument("config: n_grid must be strictly increasing");
    }
  }
  c.replicates = detail::require(j, "replicates").get<long long>();
  if (c.replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (!j.contains("seed")) {
    throw std::invalid_argument("config: seed must be explicit (reproducibility contract)");
  }
  c.seed = j["seed"].get<std::uint64_t>();
  c.burn_in = j.value("burn_in", -1LL);
  c.epsilon = j.value("epsilon", 0.1);
  if (j.contains("analyses")) {
    const json& a = j["analyses"];
    c.do_risk = a.value("risk", true);
    c.do_bounds = a.value("bounds", true);
    c.do_dkw = a.value("dkw", false);
    c.do_lecam = a.value("lecam", false);
    c.do_gibbs = a.value("gibbs", false);
  }
  c.regime_fixed_label = j.value("regime_label", std::string("auto")) == "fixed";
  if (j.contains("dkw_u")) c.dkw_u = j["dkw_u"].get<std::vector<double>>();
  if (j.contains("lecam")) {
    c.lecam_alphabet = j["lecam"].value("alphabet", 2u);
    c.lecam_regime = j["lecam"].value("regime", std::string("root_n"));
    c.lecam_delta_n = j["lecam"].value("delta_n", 0.0);
  }
  if (j.contains("gibbs")) {
    c.gibbs_alpha = j["gibbs"].value("alpha", 4.0);
    c.gibbs_alphabet = j["gibbs"].value("alphabet", 2u);
    c.gibbs_k_max = j["gibbs"].value("k_max", 10);
  }
  if (j.contains("output")) {
    c.out_csv = j["output"].value("csv", std::string{});
    c.out_json = j["output"].value("json", std::string{});
  }
  return c;
}

struct ExperimentRow {
  long long n = 0;
  long long replicates = 0;
  McRiskSummary risk;
  double bound_subcritical = 0.0;
  double bound_supercritical = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double lower_bound = 0.0;
  Regime regime = Regime::kSubcritical;
  json extras;  // toggled analyses (lecam, dkw)
};

struct RowFailure {
  long long n = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<RowFailure> failures;  // grid points that errored; rows hold the rest
  std::string hash;
  std::uint64_t seed = 0;
  json gibbs;

  bool ok() const { return failures.empty(); }
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 0,
                                       std::ostream* log = nullptr) {
  ExperimentResult result;
  result.hash = config_hash(cfg.raw);
  result.seed = cfg.seed;
  const IndexPair pair = normalize_index_pair(cfg.D, cfg.G);
  for (long long n : cfg.n_grid) {
    if (n < std::max<long long>(2, pair.span)) {
      throw std::invalid_argument("config: every n must be >= max(2, diam(D ∪ G))");
    }
  }

  // One grid point; any failure here is recorded as a row marker so the
  // completed rows still reach the output files.
  auto compute_row = [&](long long n) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProcessModel model = cfg.model.instantiate(n);
    ExperimentRow row;
    row.n = n;
    row.replicates = cfg.replicates;

    const ExactLaw law = exact_finite_law(model, pair.joint);
    row.delta = margin_delta(law, pair).delta;
    row.beta = beta_gap(law, pair);
    const GammaBound g = gamma_bound(model);
    if (g.violated) throw std::invalid_argument("experiment: Assumption A violated (Var_0 >= 1)");
    row.gamma = std::min(1.0, g.lower_bound);

    const long long burn = cfg.burn_in < 0 ? default_burn_in(model) : cfg.burn_in;
    std::vector<double> risks(static_cast<std::size_t>(cfg.replicates), 0.0);
    std::vector<double> supdev;
    if (cfg.do_dkw) supdev.assign(static_cast<std::size_t>(cfg.replicates), 0.0);
    if (cfg.do_risk || cfg.do_dkw) {
      parallel_for(static_cast<std::size_t>(cfg.replicates), threads, [&](std::size_t r) {
        SimulationPlan plan{model, n, derive_stream_seed(cfg.seed, r), burn, -1};
        const sample_t sample = simulate(plan);
        if (cfg.do_risk) {
          const GuessRule rule = fit_guess_rule(count_patterns(sample, pair));
          risks[r] = excess_risk_exact(rule, law).value;
        }
        if (cfg.do_dkw) supdev[r] = empirical_sup_deviation(sample, pair.joint, law);
      });
    }
    if (cfg.do_risk) {
      row.risk = pathguess::detail::summarize_replicates(std::move(risks));
    } else {
      row.risk.mean = row.risk.se = row.risk.q05 = row.risk.q95 =
          std::numeric_limits<double>::quiet_NaN();
      row.risk.replicates = 0;
    }

    const RegimeBound rb = rate_regime_bound(row.delta, n, row.gamma, pair.symbols, row.beta);
    row.regime = cfg.regime_fixed_label ? Regime::kFixed : rb.regime;
    const double nn = static_cast<double>(n);
    row.bound_subcritical = std::min(0.5 * std::sqrt(std::log(nn) / nn), row.beta);
    const double kk = static_cast<double>(pair.symbols);
    row.bound_supercritical =
        std::min(std::exp(-row.gamma * row.gamma * nn * row.delta * row.delta / (8.0 * kk * kk)),
                 row.beta);
    const LeCamRegime lregime = rb.regime == Regime::kSupercritical && row.delta > 0.0 && row.delta < 2.0
                                    ? LeCamRegime::margin(row.delta)
                                    : LeCamRegime::root_n();
    const Alphabet a = alphabet_of(model);
    row.lower_bound = lecam_pair(n, a.unbounded ? 0 : a.size, lregime, pair).minimax_value;

    if (cfg.do_lecam) {
      const LeCamRegime lr = cfg.lecam_regime == "margin" ? LeCamRegime::margin(cfg.lecam_delta_n)
                                                          : LeCamRegime::root_n();
      const LeCamPair lc = lecam_pair(n, cfg.lecam_alphabet, lr, pair);
      json lj = to_json(lc);
      if (n <= 100000) lj["bayes_error"] = bayes_error_oracle(lc, n);
      row.extras["lecam"] = std::move(lj);
    }
    if (cfg.do_dkw) {
      json dk = json::array();
      for (double u : cfg.dkw_u) {
        const DkwBound b = dkw_bound(u, n, pair.span - 1, pair.symbols, row.gamma);
        long long exceed = 0;
        for (double d : supdev) {
          if (d > b.threshold) ++exceed;
        }
        json e;
        e["u"] = u;
        e["threshold"] = b.threshold;
        e["tail"] = b.tail;
        e["exceedance"] = static_cast<double>(exceed) / static_cast<double>(cfg.replicates);
        dk.push_back(std::move(e));
      }
      row.extras["dkw"] = std::move(dk);
    }
    if (cfg.do_bounds) {
      const SampleSizeResult ss =
          sample_size_bound(cfg.epsilon, row.delta, row.beta, row.gamma, pair.symbols, pair.span);
      json bj;
      bj["epsilon"] = cfg.epsilon;
      bj["required_n"] = ss.n;
      bj["guaranteed_by_beta"] = ss.guaranteed_by_beta;
      row.extras["bounds"] = std::move(bj);
    }

    if (log != nullptr) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      (*log) << "pathguess: experiment n=" << n << " replicates=" << cfg.replicates
             << " wall_ms=" << ms << "\n";
    }
    return row;
  };

  for (long long n : cfg.n_grid) {
    try {
      result.rows.push_back(compute_row(n));
    } catch (const std::exception& e) {
      result.failures.push_back({n, e.what()});
      if (log != nullptr) {
        (*log) << "pathguess: experiment n=" << n << " FAILED: " << e.what() << "\n";
      }
    }
  }

  if (cfg.do_gibbs) {
    result.gibbs = to_json(gibbs_gamma(ising_long_range(cfg.gibbs_alpha, cfg.gibbs_alphabet),
                                       cfg.gibbs_k_max));
  }
  return result;
}

inline const char* kCsvHeader =
    "n,replicates,mean_risk,se_risk,q05,q95,bound_subcritical,bound_supercritical,beta,delta,"
    "gamma,lower_bound,regime,seed,config_hash";

inline std::string to_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "# pathguess-results v1 tool=" << kToolId << " config_hash=" << r.hash
     << " seed=" << r.seed << "\n";
  os << kCsvHeader << "\n";
  for (const auto& row : r.rows) {
    os << row.n << ',' << row.replicates << ',' << format_double(row.risk.mean) << ','
       << format_double(row.risk.se) << ',' << format_double(row.risk.q05) << ','
       << format_double(row.risk.q95) << ',' << format_double(row.bound_subcritical) << ','
       << format_double(row.bound_supercritical) << ',' << format_double(row.beta) << ','
       << format_double(row.delta) << ',' << format_double(row.gamma) << ','
       << format_double(row.lower_bound) << ',' << to_string(row.regime) << ',' << r.seed << ','
       << r.hash << "\n";
  }
  for (const auto& f : r.failures) {
    os << "# failed n=" << f.n << ": " << f.message << "\n";
  }
  return os.str();
}

inline json to_json(const ExperimentResult& r) {
  json j;
  j["meta"] = meta_json(r.hash, r.seed);
  json rows = json::array();
  for (const auto& row : r.rows) {
    json rj;
    rj["n"] = row.n;
    rj["replicates"] = row.replicates;
    rj["risk"] = to_json(row.risk);
    rj["bound_subcritical"] = row.bound_subcritical;
    rj["bound_supercritical"] = row.bound_supercritical;
    rj["beta"] = row.beta;
    rj["delta"] = row.delta;
    rj["gamma"] = row.gamma;
    rj["lower_bound"] = row.lower_bound;
    rj["regime"] = to_string(row.regime);
    if (!row.extras.is_null()) {
      for (auto it = row.extras.begin(); it != row.extras.end(); ++it) rj[it.key()] = it.value();
    }
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  if (!r.failures.empty()) {
    json fails = json::array();
    for (const auto& f : r.failures) {
      fails.push_back(json{{"n", f.n}, {"error", f.message}});
    }
    j["failures"] = std::move(fails);
  }
  if (!r.gibbs.is_null()) j["gibbs"] = r.gibbs;
  return j;
}

}  // namespace pathguess::harness
