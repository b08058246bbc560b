#pragma once

// CSV and JSON writers for simulation series, correlation tables and reports.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "sbd/conditions.hpp"
#include "sbd/errors.hpp"
#include "sbd/experiments.hpp"
#include "sbd/hierarchy.hpp"
#include "sbd/simulator.hpp"

namespace sbd {

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  out.precision(17);
  return out;
}

inline void write_series_csv(std::ostream& os, std::span<const ObservableSeries> series) {
  os << "replica,t,n_plus,n_minus,density_plus,density_minus\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.times.size(); ++i)
      os << s.replica << ',' << s.times[i] << ',' << s.n_plus[i] << ',' << s.n_minus[i] << ','
         << s.density_plus(i) << ',' << s.density_minus(i) << '\n';
}

inline void write_density_csv(std::ostream& os, const DensityEstimate& d) {
  os << "t,density_plus,stderr_plus,density_minus,stderr_minus\n";
  for (std::size_t i = 0; i < d.times.size(); ++i)
    os << d.times[i] << ',' << d.plus[i] << ',' << d.plus_se[i] << ',' << d.minus[i] << ',' << d.minus_se[i] << '\n';
}

inline void write_pair_correlation_csv(std::ostream& os, const PairCorrelation& pc) {
  os << "r,g,stderr\n";
  for (std::size_t i = 0; i < pc.r.size(); ++i) {
    os << pc.r[i] << ',';
    if (pc.undefined[i]) os << "nan,nan\n";
    else os << pc.g[i] << ',' << pc.stderr_[i] << '\n';
  }
}

/// One row per stored entry: order, node offsets of points 2..n relative to point 1, value.
inline void write_table_csv(std::ostream& os, const CorrelationTable& k) {
  const GridSpec& g = k.grid();
  const int d = g.dim();
  const int n_max = k.max_order();
  os << "order";
  for (int j = 1; j < n_max; ++j)
    for (int a = 0; a < d; ++a) os << ",x" << j << '_' << a;
  os << ",value\n";
  std::vector<std::size_t> cells;
  for (int n = 0; n <= n_max; ++n) {
    const auto vals = k.order(n);
    for (std::size_t e = 0; e < vals.size(); ++e) {
      os << n;
      if (n >= 1) k.decode(n, e, cells);
      for (int j = 1; j < n_max; ++j) {
        if (j < n) {
          const Point p = g.node(cells[static_cast<std::size_t>(j)]);
          for (int a = 0; a < d; ++a) os << ',' << p[a];
        } else {
          for (int a = 0; a < d; ++a) os << ',';
        }
      }
      os << ',' << vals[e] << '\n';
    }
  }
}

inline void write_norms_csv(std::ostream& os, const HierarchyTrajectory& tr) {
  os << "t,norm\n";
  for (std::size_t i = 0; i < tr.norms.size() && i < tr.times.size(); ++i) os << tr.times[i] << ',' << tr.norms[i] << '\n';
}

inline void write_distance_csv(std::ostream& os, const AveragingResult& r) {
  os << "epsilon,start,t,coupled,averaged,difference,stderr\n";
  for (const auto& c : r.curves)
    for (const auto& row : c.distance.rows)
      os << c.epsilon << ',' << c.start << ',' << row.t << ',' << row.coupled << ',' << row.averaged << ','
         << row.difference << ',' << row.stderr_ << '\n';
}

inline void write_relaxation_csv(std::ostream& os, const ErgodicityResult& r) {
  os << "start,t,density,stderr,deviation\n";
  for (const auto& c : r.curves)
    for (std::size_t i = 0; i < c.density.times.size(); ++i)
      os << c.start << ',' << c.density.times[i] << ',' << c.density.minus[i] << ',' << c.density.minus_se[i] << ','
         << c.deviation[i] << '\n';
}

// ---------------------------------------------------------------------- JSON

inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j{{"c_minus", r.regime.c_minus},
                   {"c_plus", r.regime.c_plus},
                   {"a_minus", finite_or_null(r.a_minus)},
                   {"a_plus", finite_or_null(r.a_plus)},
                   {"a_bar", finite_or_null(r.a_bar)},
                   {"m_star_minus", r.m_star_minus},
                   {"m_star_plus", r.m_star_plus},
                   {"m_star_bar", r.m_star_bar},
                   {"lambda0", r.lambda0},
                   {"omega0", r.omega0},
                   {"e2", r.e2_ok},
                   {"s2", r.s2_ok},
                   {"av2", r.av2_ok},
                   {"e3_sufficient", r.e3_sufficient_ok},
                   {"all_ok", r.all_ok()},
                   {"details", r.details}};
  if (r.spot)
    j["spot_check"] = {{"checked", r.spot->checked},
                       {"failures", r.spot->failures},
                       {"worst_excess", finite_or_null(r.spot->worst_excess)},
                       {"passed", r.spot->passed()},
                       {"notes", r.spot->notes}};
  return j;
}

inline nlohmann::json to_json(const FitResult& f) {
  return {{"rate", f.rate},
          {"rate_stderr", f.rate_stderr},
          {"amplitude", f.amplitude},
          {"r_squared", f.r_squared},
          {"window", {f.window.start, f.window.end}},
          {"points", f.points}};
}

inline nlohmann::json to_json(const ErgodicityResult& r) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : r.curves) {
    nlohmann::json j{{"start", c.start}};
    if (c.fit) j["fit"] = to_json(*c.fit);
    else j["fit_error"] = c.fit_error;
    curves.push_back(j);
  }
  return {{"rho_inv", r.rho_inv},
          {"lambda0", r.lambda0},
          {"consistent_with_gap", r.consistent_with_gap()},
          {"curves", curves}};
}

inline nlohmann::json to_json(const AveragingResult& r) {
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : r.curves)
    curves.push_back({{"epsilon", c.epsilon},
                      {"start", c.start},
                      {"sup_distance", c.distance.sup},
                      {"sup_stderr", c.distance.sup_stderr},
                      {"sup_time", c.distance.sup_time}});
  return {{"curves", curves}, {"monotone_empty", r.monotone("empty")}, {"monotone_burn_in", r.monotone("burn_in")}};
}

inline nlohmann::json to_json(const InvariantSummary& s, const KsResult& ks) {
  nlohmann::json j{{"rho_inv", s.rho_inv},
                   {"kc_norm", s.kc_norm},
                   {"iterations", ks.iterations},
                   {"residual", ks.residual},
                   {"contraction", ks.contraction},
                   {"forcing_norm", ks.forcing_norm},
                   {"ruelle_consistent", ks.ruelle_consistent}};
  if (s.lambda_bar)
    j["lambda_bar"] = {{"value", s.lambda_bar->value}, {"tail_bound", s.lambda_bar->tail_bound}};
  return j;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { open_output(p) << j.dump(2) << '\n'; }

}  // namespace sbd
