// Command-line front end: simulation, counting, guessing, risk evaluation,
// bound reports, DKW checks, two-point lower bounds, Gibbs calculus and the
// experiment driver. Exit codes: 0 success, 1 validation error, 2 runtime
// failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pathguess/analysis.hpp"
#include "pathguess/estimator.hpp"
#include "pathguess/gibbs.hpp"
#include "pathguess/harness.hpp"
#include "pathguess/models.hpp"
#include "pathguess/sampler.hpp"
#include "pathguess/version.hpp"

namespace {

using nlohmann::json;
using namespace pathguess;

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stoi(token));
  }
  return out;
}

std::vector<double> split_doubles(const std::string& s) {
  std::vector<double> out;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stod(token));
  }
  return out;
}

std::vector<symbol_t> split_symbols(const std::string& s) {
  std::vector<symbol_t> out;
  for (int v : split_ints(s)) {
    if (v < 0) throw std::invalid_argument("symbol ids must be >= 0");
    out.push_back(static_cast<symbol_t>(v));
  }
  return out;
}

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open file: " + path);
  json j;
  is >> j;
  return j;
}

ProcessModel load_model(const std::string& path) {
  return harness::model_from_json(load_json(path));
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write file: " + path);
  os << content;
}

void write_json(const std::string& path, const json& j) {
  write_output(path, j.dump(2) + "\n");
}

json meta_for(const json& invocation, std::optional<std::uint64_t> seed) {
  json m;
  m["tool"] = kToolId;
  m["config_hash"] = harness::config_hash(invocation);
  if (seed) {
    m["seed"] = *seed;
  } else {
    m["seed"] = nullptr;
  }
  return m;
}

struct CommonPair {
  std::string D, G;
  IndexPair pair() const { return normalize_index_pair(split_ints(D), split_ints(G)); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathwise guessing estimator for categorical time series"};
  app.set_version_flag("--version", std::string(kToolId));
  app.require_subcommand(1);

  // --- simulate -------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "simulate a trajectory from a model");
  std::string sim_model, sim_out = "-";
  long long sim_n = 0, sim_burn = -1;
  int sim_memory = -1;
  std::uint64_t sim_seed = 0;
  sim->add_option("--model", sim_model, "model JSON file")->required();
  sim->add_option("--n", sim_n, "trajectory length")->required();
  sim->add_option("--seed", sim_seed, "RNG seed (no default: seeds are explicit)")->required();
  sim->add_option("--burn-in", sim_burn, "burn-in steps (-1 = coupling-based default)");
  sim->add_option("--memory", sim_memory, "past-window truncation (-1 = model memory)");
  sim->add_option("--out", sim_out, "output path ('-' = stdout)");

  // --- count ----------------------------------------------------------------
  auto* cnt = app.add_subcommand("count", "sliding-window pattern-pair counts");
  std::string cnt_sample, cnt_out = "-";
  CommonPair cnt_pair;
  cnt->add_option("--sample", cnt_sample, "sample file")->required();
  cnt->add_option("--D", cnt_pair.D, "data set, comma-separated integers (may be empty)");
  cnt->add_option("--G", cnt_pair.G, "guess set, comma-separated integers")->required();
  cnt->add_option("--out", cnt_out, "output path");

  // --- guess ----------------------------------------------------------------
  auto* gss = app.add_subcommand("guess", "fit the guessing rule, optionally query it");
  std::string gss_sample, gss_out = "-", gss_query;
  bool gss_has_query = false;
  CommonPair gss_pair;
  gss->add_option("--sample", gss_sample, "sample file")->required();
  gss->add_option("--D", gss_pair.D, "data set");
  gss->add_option("--G", gss_pair.G, "guess set")->required();
  auto* qopt = gss->add_option("--query", gss_query, "data pattern b to guess for");
  gss->add_option("--out", gss_out, "output path");

  // --- risk -----------------------------------------------------------------
  auto* rsk = app.add_subcommand("risk", "excess risk: exact for a rule, or Monte Carlo");
  std::string rsk_model, rsk_rule, rsk_out = "-";
  CommonPair rsk_pair;
  long long rsk_n = 0, rsk_reps = 0, rsk_burn = -1;
  std::uint64_t rsk_seed = 0;
  std::size_t rsk_threads = 0;
  rsk->add_option("--model", rsk_model, "model JSON file")->required();
  rsk->add_option("--D", rsk_pair.D, "data set");
  rsk->add_option("--G", rsk_pair.G, "guess set")->required();
  rsk->add_option("--rule", rsk_rule, "rule JSON (exact mode)");
  rsk->add_option("--n", rsk_n, "training length (Monte Carlo mode)");
  rsk->add_option("--replicates", rsk_reps, "training replicates (Monte Carlo mode)");
  auto* rsk_seed_opt = rsk->add_option("--seed", rsk_seed, "RNG seed (Monte Carlo mode)");
  rsk->add_option("--burn-in", rsk_burn, "burn-in (-1 = default)");
  rsk->add_option("--threads", rsk_threads, "worker threads (0 = auto)");
  rsk->add_option("--out", rsk_out, "output path");

  // --- bounds ---------------------------------------------------------------
  auto* bnd = app.add_subcommand("bounds", "margin, gap, Gamma, sample size and rate bounds");
  std::string bnd_model, bnd_out = "-";
  CommonPair bnd_pair;
  double bnd_eps = 0.0, bnd_u = 0.1;
  long long bnd_n = -1;
  bnd->add_option("--model", bnd_model, "model JSON file")->required();
  bnd->add_option("--D", bnd_pair.D, "data set");
  bnd->add_option("--G", bnd_pair.G, "guess set")->required();
  bnd->add_option("--epsilon", bnd_eps, "target excess risk")->required();
  bnd->add_option("--n", bnd_n, "sample size for regime/DKW fields (-1 = required_n)");
  bnd->add_option("--u", bnd_u, "DKW deviation parameter");
  bnd->add_option("--out", bnd_out, "output path");

  // --- dkw ------------------------------------------------------------------
  auto* dkw = app.add_subcommand("dkw", "DKW-type threshold/tail, optionally empirical");
  std::string dkw_model, dkw_S, dkw_u = "0.1", dkw_out = "-";
  double dkw_gamma = 0.0;
  long long dkw_n = 0, dkw_reps = 0;
  int dkw_k = -1, dkw_size = 0;
  std::uint64_t dkw_seed = 0;
  std::size_t dkw_threads = 0;
  dkw->add_option("--n", dkw_n, "sample length")->required();
  dkw->add_option("--u", dkw_u, "deviation parameters, comma-separated");
  dkw->add_option("--gamma", dkw_gamma, "Gamma lower bound (formula mode)");
  dkw->add_option("--k", dkw_k, "diam(S) = sup S - inf S (formula mode)");
  dkw->add_option("--S-size", dkw_size, "|S| (formula mode)");
  dkw->add_option("--model", dkw_model, "model JSON (empirical mode)");
  dkw->add_option("--S", dkw_S, "index set S, comma-separated (empirical mode)");
  dkw->add_option("--replicates", dkw_reps, "replicates for the empirical exceedance");
  auto* dkw_seed_opt = dkw->add_option("--seed", dkw_seed, "RNG seed (empirical mode)");
  dkw->add_option("--threads", dkw_threads, "worker threads (0 = auto)");
  dkw->add_option("--out", dkw_out, "output path");

  // --- lecam ----------------------------------------------------------------
  auto* lec = app.add_subcommand("lecam", "two-point lower-bound construction");
  std::string lec_A = "2", lec_regime = "root_n", lec_out = "-";
  CommonPair lec_pair{"", "1"};
  long long lec_n = 0;
  double lec_delta = 0.0;
  bool lec_no_bayes = false;
  lec->add_option("--n", lec_n, "sample size")->required();
  lec->add_option("--A", lec_A, "alphabet size, or 'inf'");
  lec->add_option("--regime", lec_regime, "root_n | margin");
  lec->add_option("--delta-n", lec_delta, "margin delta_n (margin regime)");
  lec->add_option("--D", lec_pair.D, "data set");
  lec->add_option("--G", lec_pair.G, "guess set");
  lec->add_flag("--no-bayes", lec_no_bayes, "skip the exact Bayes error oracle");
  lec->add_option("--out", lec_out, "output path");

  // --- gibbs ----------------------------------------------------------------
  auto* gbb = app.add_subcommand("gibbs", "Gibbs-potential variation and Gamma bounds");
  std::string gbb_catalog, gbb_out = "-";
  double gbb_alpha = 0.0;
  std::uint32_t gbb_A = 2;
  int gbb_kmax = 10;
  auto* gbb_alpha_opt = gbb->add_option("--alpha", gbb_alpha, "long-range Ising exponent");
  gbb->add_option("--catalog", gbb_catalog, "shape catalog JSON file");
  gbb->add_option("--A", gbb_A, "alphabet size");
  gbb->add_option("--k-max", gbb_kmax, "largest k for Var_k bounds");
  gbb->add_option("--out", gbb_out, "output path");

  // --- experiment -------------------------------------------------------------
  auto* exp = app.add_subcommand("experiment", "run a configured experiment grid");
  std::string exp_config, exp_out, exp_json_out;
  std::size_t exp_threads = 0;
  exp->add_option("--config", exp_config, "experiment config JSON")->required();
  exp->add_option("--out", exp_out, "CSV output path (overrides config)");
  exp->add_option("--json-out", exp_json_out, "JSON output path (overrides config)");
  exp->add_option("--threads", exp_threads, "worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      const ProcessModel model = load_model(sim_model);
      const long long burn = sim_burn < 0 ? default_burn_in(model) : sim_burn;
      SimulationPlan plan{model, sim_n, sim_seed, burn, sim_memory};
      const sample_t sample = simulate(plan);
      json inv{{"command", "simulate"}, {"model", load_json(sim_model)}, {"n", sim_n},
               {"seed", sim_seed}, {"burn_in", sim_burn}, {"memory", sim_memory}};
      std::ostringstream os;
      harness::write_sample(os, sample, sim_seed, harness::config_hash(inv));
      write_output(sim_out, os.str());
    } else if (*cnt) {
      std::ifstream is(cnt_sample);
      if (!is) throw std::invalid_argument("cannot open file: " + cnt_sample);
      const sample_t sample = harness::read_sample(is);
      const CountTable table = count_patterns(sample, cnt_pair.pair());
      json inv{{"command", "count"}, {"sample", cnt_sample}, {"D", cnt_pair.D}, {"G", cnt_pair.G}};
      json out = harness::to_json(table);
      out["meta"] = meta_for(inv, std::nullopt);
      write_json(cnt_out, out);
    } else if (*gss) {
      std::ifstream is(gss_sample);
      if (!is) throw std::invalid_argument("cannot open file: " + gss_sample);
      const sample_t sample = harness::read_sample(is);
      const GuessRule rule = fit_guess_rule(count_patterns(sample, gss_pair.pair()));
      json inv{{"command", "guess"}, {"sample", gss_sample}, {"D", gss_pair.D}, {"G", gss_pair.G}};
      json out = harness::to_json(rule);
      out["meta"] = meta_for(inv, std::nullopt);
      gss_has_query = qopt->count() > 0;
      if (gss_has_query) {
        const pattern_t b = split_symbols(gss_query);
        out["query"] = b;
        out["guess"] = guess(rule, b);
      }
      write_json(gss_out, out);
    } else if (*rsk) {
      const ProcessModel model = load_model(rsk_model);
      const IndexPair pair = rsk_pair.pair();
      json inv{{"command", "risk"}, {"model", load_json(rsk_model)}, {"D", rsk_pair.D},
               {"G", rsk_pair.G}};
      json out;
      if (!rsk_rule.empty()) {
        const json rj = load_json(rsk_rule);
        GuessRule rule;
        rule.pair = pair;
        for (const auto& e : rj.at("table")) {
          rule.table.emplace(e.at("b").get<pattern_t>(), e.at("a").get<pattern_t>());
        }
        rule.fallback = rj.at("fallback").get<pattern_t>();
        const ExactLaw law = exact_finite_law(model, pair.joint);
        out = harness::to_json(excess_risk_exact(rule, law));
        out["meta"] = meta_for(inv, std::nullopt);
      } else {
        if (rsk_seed_opt->count() == 0) {
          throw std::invalid_argument("risk: Monte Carlo mode needs an explicit --seed");
        }
        inv["n"] = rsk_n;
        inv["replicates"] = rsk_reps;
        inv["seed"] = rsk_seed;
        inv["burn_in"] = rsk_burn;
        const McRiskSummary s =
            excess_risk_mc(model, pair, rsk_n, rsk_reps, rsk_seed, rsk_burn, rsk_threads);
        out = harness::to_json(s);
        out["meta"] = meta_for(inv, rsk_seed);
      }
      write_json(rsk_out, out);
    } else if (*bnd) {
      const ProcessModel model = load_model(bnd_model);
      const IndexPair pair = bnd_pair.pair();
      const BoundReport rep = make_bound_report(model, pair, bnd_eps, bnd_n, bnd_u);
      json inv{{"command", "bounds"}, {"model", load_json(bnd_model)}, {"D", bnd_pair.D},
               {"G", bnd_pair.G}, {"epsilon", bnd_eps}, {"n", bnd_n}, {"u", bnd_u}};
      json out = harness::to_json(rep);
      out["meta"] = meta_for(inv, std::nullopt);
      write_json(bnd_out, out);
    } else if (*dkw) {
      const std::vector<double> us = split_doubles(dkw_u);
      if (us.empty()) throw std::invalid_argument("dkw: need at least one --u value");
      json inv{{"command", "dkw"}, {"n", dkw_n}, {"u", dkw_u}};
      json out;
      double gamma = dkw_gamma;
      int k = dkw_k, size = dkw_size;
      std::vector<double> supdev;
      if (!dkw_model.empty()) {
        const ProcessModel model = load_model(dkw_model);
        const GammaBound g = gamma_bound(model);
        if (g.violated) throw std::invalid_argument("dkw: Assumption A violated for this model");
        gamma = std::min(1.0, g.lower_bound);
        const std::vector<int> S = normalize_positions(split_ints(dkw_S));
        k = S.back() - 1;
        size = static_cast<int>(S.size());
        inv["model"] = load_json(dkw_model);
        inv["S"] = dkw_S;
        if (dkw_reps > 0) {
          if (dkw_seed_opt->count() == 0) {
            throw std::invalid_argument("dkw: empirical mode needs an explicit --seed");
          }
          inv["replicates"] = dkw_reps;
          inv["seed"] = dkw_seed;
          const ExactLaw law = exact_finite_law(model, S);
          const long long burn = default_burn_in(model);
          supdev.assign(static_cast<std::size_t>(dkw_reps), 0.0);
          parallel_for(static_cast<std::size_t>(dkw_reps), dkw_threads, [&](std::size_t r) {
            SimulationPlan plan{model, dkw_n, derive_stream_seed(dkw_seed, r), burn, -1};
            supdev[r] = empirical_sup_deviation(simulate(plan), S, law);
          });
        }
      } else {
        if (k < 0 || size < 1 || !(gamma > 0.0)) {
          throw std::invalid_argument("dkw: formula mode needs --gamma, --k and --S-size");
        }
        inv["gamma"] = gamma;
        inv["k"] = k;
        inv["S_size"] = size;
      }
      json rows = json::array();
      for (double u : us) {
        const DkwBound b = dkw_bound(u, dkw_n, k, size, gamma);
        json row{{"u", u}, {"threshold", b.threshold}, {"tail", b.tail}};
        if (!supdev.empty()) {
          long long exceed = 0;
          for (double d : supdev) {
            if (d > b.threshold) ++exceed;
          }
          row["exceedance"] = static_cast<double>(exceed) / static_cast<double>(dkw_reps);
        }
        rows.push_back(std::move(row));
      }
      out["gamma"] = gamma;
      out["k"] = k;
      out["S_size"] = size;
      out["n"] = dkw_n;
      out["bounds"] = std::move(rows);
      out["meta"] = meta_for(inv, dkw_reps > 0 ? std::optional<std::uint64_t>(dkw_seed) : std::nullopt);
      write_json(dkw_out, out);
    } else if (*lec) {
      const std::uint32_t A = lec_A == "inf" ? 0u : static_cast<std::uint32_t>(std::stoul(lec_A));
      const LeCamRegime regime = lec_regime == "margin" ? LeCamRegime::margin(lec_delta)
                                                        : LeCamRegime::root_n();
      const IndexPair pair = lec_pair.pair();
      const LeCamPair lc = lecam_pair(lec_n, A, regime, pair);
      json inv{{"command", "lecam"}, {"n", lec_n}, {"A", lec_A}, {"regime", lec_regime},
               {"delta_n", lec_delta}, {"D", lec_pair.D}, {"G", lec_pair.G}};
      json out = harness::to_json(lc);
      if (!lec_no_bayes) {
        const double be = bayes_error_oracle(lc, lec_n);
        out["bayes_error"] = be;
        out["bh_as_printed"] = std::exp(-lc.kl_bound);          // bound on 1 - d_TV
        out["bh_conservative"] = 0.5 * std::exp(-lc.kl_bound);  // bound on the averaged error
      }
      out["meta"] = meta_for(inv, std::nullopt);
      write_json(lec_out, out);
    } else if (*gbb) {
      GibbsPotential pot;
      json inv{{"command", "gibbs"}, {"A", gbb_A}, {"k_max", gbb_kmax}};
      if (gbb_alpha_opt->count() > 0) {
        pot = ising_long_range(gbb_alpha, gbb_A);
        inv["alpha"] = gbb_alpha;
      } else if (!gbb_catalog.empty()) {
        const json cj = load_json(gbb_catalog);
        pot.alphabet = gbb_A;
        for (const auto& s : cj.at("shapes")) {
          pot.shapes.push_back({s.at("reach").get<int>(), s.at("oscillation").get<double>()});
        }
        if (cj.contains("tail")) {
          pot.tail = PowerLawTail{cj["tail"].at("coefficient").get<double>(),
                                  cj["tail"].at("exponent").get<double>()};
        }
        inv["catalog"] = cj;
      } else {
        throw std::invalid_argument("gibbs: need --alpha or --catalog");
      }
      json out = harness::to_json(gibbs_gamma(pot, gbb_kmax));
      out["meta"] = meta_for(inv, std::nullopt);
      write_json(gbb_out, out);
    } else if (*exp) {
      const json cj = load_json(exp_config);
      const harness::ExperimentConfig cfg = harness::config_from_json(cj);
      const harness::ExperimentResult result = harness::run_experiment(cfg, exp_threads, &std::cerr);
      const std::string csv_path = !exp_out.empty() ? exp_out : cfg.out_csv;
      const std::string json_path = !exp_json_out.empty() ? exp_json_out : cfg.out_json;
      if (csv_path.empty() && json_path.empty()) {
        throw std::invalid_argument("experiment: no output path (config output.csv or --out)");
      }
      if (!csv_path.empty()) write_output(csv_path, harness::to_csv(result));
      if (!json_path.empty()) write_json(json_path, harness::to_json(result));
      if (!result.ok()) {
        std::cerr << "pathguess: " << result.failures.size()
                  << " grid point(s) failed; partial results written\n";
        return 2;
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "pathguess: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "pathguess: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
