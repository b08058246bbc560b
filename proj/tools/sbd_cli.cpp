// Command-line driver: regime checks, stationary correlation tables, hierarchy evolution,
// simulation runs and the ergodicity / averaging experiments.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbd/sbd.hpp"

namespace fs = std::filesystem;
using namespace sbd;

namespace {

enum Exit { kOk = 0, kFailure = 1, kSchema = 2, kInfeasible = 3, kNumerical = 4 };

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::string> epsilon;
  std::optional<int> order;
  std::optional<int> grid;
};

std::vector<double> parse_csv_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--epsilon: '" + item + "' is not a number");
    }
  }
  return out;
}

/// Loads the config document and applies flag overrides to it, so the manifest holds what actually ran.
ExperimentConfig effective_config(const Overrides& o) {
  std::ifstream in(o.config);
  if (!in) throw SchemaError("cannot open config file '" + o.config + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("config '" + o.config + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config: expected an object");
  auto section = [&doc](const char* key) -> Json& {
    if (!doc.contains(key)) doc[key] = Json::object();
    return doc[key];
  };
  if (o.seed) section("simulation")["seed"] = *o.seed;
  if (o.replicas) section("simulation")["replicas"] = *o.replicas;
  if (o.epsilon) section("simulation")["epsilons"] = parse_csv_list(*o.epsilon);
  if (o.order) section("hierarchy")["order"] = *o.order;
  if (o.grid) section("hierarchy")["points_per_axis"] = *o.grid;
  if (!o.out.empty()) doc["output"] = o.out;
  return parse_config(doc);
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& c) {
  write_json(dir / "manifest.json", {{"tool", "sbd"},
                                     {"version", SBD_VERSION},
                                     {"command", command},
                                     {"config_hash", hex64(config_hash(c.source))},
                                     {"seed", c.simulation.seed},
                                     {"compiler", __VERSION__},
                                     {"config", c.source}});
}

CheckOptions check_options(const ExperimentConfig& c) {
  CheckOptions opt;
  opt.torus = c.torus;
  opt.dim = c.torus.dim();
  opt.spot.seed = c.simulation.seed;
  return opt;
}

GridSpec grid_of(const ExperimentConfig& c) { return GridSpec(c.hierarchy.points_per_axis, c.torus); }

KsOptions ks_options(const ExperimentConfig& c) {
  KsOptions k;
  k.order = c.hierarchy.order;
  k.tol = c.hierarchy.tol;
  k.max_iter = c.hierarchy.max_iter;
  k.closure = c.hierarchy.closure;
  return k;
}

/// Best regime from the configured candidates for the given scope; nullopt when none is feasible.
std::optional<ConditionReport> best_regime(const ExperimentConfig& c, ScanScope scope, const AveragedModel* am = nullptr) {
  const auto candidates = c.regime_candidates();
  const auto scan = scan_feasible(c.model, candidates, check_options(c), scope, am);
  if (!scan.feasible) return std::nullopt;
  return scan.report;
}

void print_report(const ConditionReport& r) {
  std::printf("regime C- = %g, C+ = %g\n", r.regime.c_minus, r.regime.c_plus);
  std::printf("  a- = %g  a+ = %g  a_bar = %g\n", r.a_minus, r.a_plus, r.a_bar);
  std::printf("  e2 %s  s2 %s  av2 %s  e3 %s", r.e2_ok ? "ok" : "FAIL", r.s2_ok ? "ok" : "FAIL",
              r.av2_ok ? "ok" : "FAIL", r.e3_sufficient_ok ? "ok" : "FAIL");
  if (r.spot) std::printf("  spot %d/%d ok", r.spot->checked - r.spot->failures, r.spot->checked);
  std::printf("\n  lambda0 = %g  omega0 = %g\n", r.lambda0, r.omega0);
  for (const auto& d : r.details) std::printf("  %s\n", d.c_str());
}

int cmd_check(const ExperimentConfig& c, const fs::path& out) {
  write_manifest(out, "check", c);
  const auto candidates = c.regime_candidates();
  ConditionReport report;
  bool ok = false;
  if (candidates.size() == 1) {
    report = check_regime(c.model, candidates.front(), check_options(c));
    ok = report.all_ok();
  } else {
    const auto scan = scan_feasible(c.model, candidates, check_options(c));
    report = scan.report;
    ok = scan.feasible && report.all_ok();
  }
  write_json(out / "conditions.json", to_json(report));
  print_report(report);
  if (!ok) {
    std::cerr << "infeasible: no configured regime satisfies every condition; "
                 "raise C-/C+ in 'regime'/'regime_grid' or weaken the interactions\n";
    return kInfeasible;
  }
  return kOk;
}

/// The stationary table does not depend on the feasible weight; the smallest feasible C- gives the
/// tightest truncation bounds, so the table is solved there.
KsResult solve_invariant(const ExperimentConfig& c, const RegimeParams& fallback) {
  auto candidates = c.regime_candidates();
  std::sort(candidates.begin(), candidates.end(),
            [](const RegimeParams& a, const RegimeParams& b) { return a.c_minus < b.c_minus; });
  CheckOptions quick = check_options(c);
  quick.spot_check = false;
  RegimeParams rp = fallback;
  for (const auto& cand : candidates)
    if (scan_feasible(c.model, std::span(&cand, 1), quick, ScanScope::environment_only).feasible) {
      rp = cand;
      break;
    }
  return ks_solve(c.model, rp, grid_of(c), ks_options(c));
}

int cmd_invariant(const ExperimentConfig& c, const fs::path& out) {
  write_manifest(out, "invariant", c);
  const auto report = best_regime(c, ScanScope::environment_only);
  if (!report) {
    std::cerr << "infeasible: the environment condition fails for every configured regime\n";
    return kInfeasible;
  }
  const auto ks = solve_invariant(c, report->regime);
  const auto summary = invariant_summary(ks.k_inv, c.model);
  auto os = open_output(out / "k_inv.csv");
  write_table_csv(os, ks.k_inv);
  write_json(out / "invariant.json", to_json(summary, ks));
  std::printf("rho_inv = %.12g  (%d iterations, residual %.3g)\n", summary.rho_inv, ks.iterations, ks.residual);
  if (summary.lambda_bar)
    std::printf("lambda_bar = %.12g +- %.3g\n", summary.lambda_bar->value, summary.lambda_bar->tail_bound);
  return kOk;
}

int cmd_evolve(const ExperimentConfig& c, const fs::path& out) {
  write_manifest(out, "evolve", c);
  const auto report = best_regime(c, ScanScope::environment_only);
  if (!report) {
    std::cerr << "infeasible: the environment condition fails for every configured regime\n";
    return kInfeasible;
  }
  const auto ks = solve_invariant(c, report->regime);
  const auto k0 = CorrelationTable::poisson(grid_of(c), c.hierarchy.order, c.simulation.initial_density_minus,
                                            report->regime.c_minus);
  EvolveOptions eo;
  eo.reference = ks.k_inv;
  eo.closure = c.hierarchy.closure;
  eo.record_every = 10;
  const auto tr = evolve_hierarchy(k0, c.model, c.hierarchy.evolve_horizon, c.hierarchy.dt, eo);
  auto os = open_output(out / "norms.csv");
  write_norms_csv(os, tr);
  auto fs_ = open_output(out / "k_final.csv");
  write_table_csv(fs_, tr.tables.back());
  Json summary{{"lambda0", report->lambda0}, {"final_norm", tr.norms.empty() ? 0.0 : tr.norms.back()}};
  try {
    const auto fit = fit_exponential_rate(tr.times, tr.norms, 0.0, {});
    summary["fit"] = to_json(fit);
    std::printf("K_C distance decay rate %.6g (lambda0 = %.6g)\n", fit.rate, report->lambda0);
  } catch (const DegenerateFitError& e) {
    summary["fit_error"] = e.what();
    std::printf("no decay fit: %s\n", e.what());
  }
  write_json(out / "evolve.json", summary);
  return kOk;
}

int cmd_simulate(const ExperimentConfig& c, const fs::path& out) {
  write_manifest(out, "simulate", c);
  SimulationSettings st;
  st.epsilon = c.simulation.epsilons.empty() ? 1.0 : c.simulation.epsilons.front();
  st.horizon = c.simulation.horizon;
  st.seed = c.simulation.seed;
  st.max_events = c.simulation.max_events;
  st.sample_times = uniform_times(st.horizon, c.simulation.intervals);
  st.keep_configurations = true;
  CounterRng rng(st.seed, 0xffffffffULL);
  const auto initial = poisson_configuration(c.simulation.initial_density_plus * c.torus.volume(),
                                             c.simulation.initial_density_minus * c.torus.volume(), c.torus, rng);
  const auto series = run(c.model, c.torus, st, initial);
  auto os = open_output(out / "series.csv");
  write_series_csv(os, std::span(&series, 1));
  std::vector<FiniteConfiguration> finals{series.configurations.back().plus};
  const double reach = std::max(c.model.interaction_reach(), c.torus.side() / 20.0);
  const double r_max = std::min(2.0 * reach, c.torus.side() / 2.0);
  auto pc = open_output(out / "pair_correlation.csv");
  write_pair_correlation_csv(pc, estimate_pair_correlation(finals, c.torus, r_max / 20.0, r_max));
  std::printf("%llu events to t = %g; final |gamma+| = %zu, |gamma-| = %zu\n",
              static_cast<unsigned long long>(series.events), series.final_time, series.n_plus.back(),
              series.n_minus.back());
  return kOk;
}

int cmd_ergodicity(const ExperimentConfig& c, const fs::path& out) {
  write_manifest(out, "ergodicity", c);
  const auto report = best_regime(c, ScanScope::environment_only);
  if (!report) {
    std::cerr << "infeasible: the environment condition fails for every configured regime\n";
    return kInfeasible;
  }
  const auto ks = solve_invariant(c, report->regime);
  ErgodicityOptions eo;
  eo.horizon = c.ergodicity.horizon;
  eo.intervals = c.ergodicity.intervals;
  eo.replicas = c.simulation.replicas;
  eo.seed = c.simulation.seed;
  eo.high_density_factor = c.ergodicity.high_density_factor;
  const auto res = run_ergodicity(c.model, c.torus, ks.k_inv.density(), report->lambda0, eo);
  auto os = open_output(out / "relaxation.csv");
  write_relaxation_csv(os, res);
  write_json(out / "ergodicity.json", to_json(res));
  for (const auto& curve : res.curves) {
    if (curve.fit)
      std::printf("%-13s rate %.4g +- %.2g\n", curve.start.c_str(), curve.fit->rate, curve.fit->rate_stderr);
    else
      std::printf("%-13s no fit: %s\n", curve.start.c_str(), curve.fit_error.c_str());
  }
  std::printf("lambda0 = %.4g; consistent with gap: %s\n", res.lambda0, res.consistent_with_gap() ? "yes" : "no");
  return kOk;
}

int cmd_averaging(const ExperimentConfig& c, const fs::path& out) {
  validate_epsilons(c.simulation.epsilons);
  write_manifest(out, "averaging", c);
  const auto env = best_regime(c, ScanScope::environment_only);
  if (!env) {
    std::cerr << "infeasible: the environment condition fails for every configured regime\n";
    return kInfeasible;
  }
  const auto ks = solve_invariant(c, env->regime);
  const auto am = build_averaged_model(c.model, ks.k_inv, c.torus);
  if (!best_regime(c, ScanScope::full, &am)) {
    std::cerr << "infeasible: no configured regime satisfies the system and averaged conditions\n";
    return kInfeasible;
  }
  AveragingOptions ao;
  ao.epsilons = c.simulation.epsilons;
  ao.horizon = c.simulation.horizon;
  ao.intervals = c.simulation.intervals;
  ao.replicas = c.simulation.replicas;
  ao.seed = c.simulation.seed;
  ao.burn_in = c.simulation.burn_in;
  const auto res = run_averaging(c.model, am, c.torus, ao);
  auto os = open_output(out / "distance.csv");
  write_distance_csv(os, res);
  auto ad = open_output(out / "averaged_density.csv");
  write_density_csv(ad, res.averaged);
  write_json(out / "averaging.json", to_json(res));
  for (const auto& curve : res.curves)
    std::printf("eps %-6g %-8s sup distance %.4g +- %.2g\n", curve.epsilon, curve.start.c_str(), curve.distance.sup,
                curve.distance.sup_stderr);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial birth-and-death dynamics in a random environment"};
  app.set_version_flag("--version", std::string(SBD_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory (overrides the config)");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--replicas", o.replicas, "replicas per experiment arm")->check(CLI::PositiveNumber);
  app.add_option("--epsilon", o.epsilon, "comma-separated decreasing scale list");
  app.add_option("--order", o.order, "hierarchy truncation order")->check(CLI::Range(1, 4));
  app.add_option("--grid", o.grid, "grid points per axis")->check(CLI::Range(4, 4096));

  using Command = int (*)(const ExperimentConfig&, const fs::path&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"check", {"report the regime conditions", cmd_check}},
      {"invariant", {"solve the stationary correlation table", cmd_invariant}},
      {"evolve", {"integrate the correlation hierarchy toward the stationary table", cmd_evolve}},
      {"simulate", {"single coupled run", cmd_simulate}},
      {"ergodicity", {"environment relaxation from displaced starts", cmd_ergodicity}},
      {"averaging", {"coupled vs averaged system densities over the scale sweep", cmd_averaging}},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, info] : commands) subs.emplace_back(app.add_subcommand(name, info.first), info.second);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }

  try {
    const ExperimentConfig cfg = effective_config(o);
    const fs::path out = cfg.output;
    for (const auto& [sub, fn] : subs)
      if (sub->parsed()) return fn(cfg, out);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kSchema;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kSchema;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ExplosionError& e) {
    std::cerr << "explosion: " << e.what() << '\n';
    return kNumerical;
  } catch (const StabilityError& e) {
    std::cerr << "instability: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
