#pragma once

// JSON experiment configuration: strict parsing (unknown keys and wrong types are
// schema errors), canonical serialization and a stable hash for run manifests.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbd/conditions.hpp"
#include "sbd/errors.hpp"
#include "sbd/experiments.hpp"
#include "sbd/geometry.hpp"
#include "sbd/hierarchy.hpp"
#include "sbd/models.hpp"
#include "sbd/potentials.hpp"
#include "sbd/regime.hpp"

namespace sbd {

using Json = nlohmann::json;

struct HierarchyConfig {
  int points_per_axis = 40;
  int order = kDefaultOrder;
  Closure closure = Closure::poisson;
  double tol = 1e-12;
  int max_iter = 500;
  double evolve_horizon = 5.0;
  double dt = 0.0;  ///< 0 picks the default step
};

struct SimulationConfig {
  std::vector<double> epsilons{1.0, 0.3, 0.1};
  double horizon = 10.0;
  int intervals = 10;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  double burn_in = 20.0;
  std::uint64_t max_events = 10'000'000;
  double initial_density_plus = 0.0;   ///< Poisson start for `simulate`
  double initial_density_minus = 0.0;
};

struct ErgodicityConfig {
  double horizon = 1.5;
  int intervals = 50;
  double high_density_factor = 2.0;
};

struct ExperimentConfig {
  RateModel model{GlauberGlauber{}};
  RegimeParams regime;
  std::vector<double> grid_c_minus;  ///< feasibility scan; empty means the single regime
  std::vector<double> grid_c_plus;
  Torus torus{1, 10.0};
  HierarchyConfig hierarchy;
  SimulationConfig simulation;
  ErgodicityConfig ergodicity;
  std::string output = "out";
  Json source;  ///< the parsed document, for manifests

  std::vector<RegimeParams> regime_candidates() const {
    if (grid_c_minus.empty() && grid_c_plus.empty()) return {regime};
    const std::vector<double> cm = grid_c_minus.empty() ? std::vector<double>{regime.c_minus} : grid_c_minus;
    const std::vector<double> cp = grid_c_plus.empty() ? std::vector<double>{regime.c_plus} : grid_c_plus;
    return regime_grid(cm, cp);
  }
};

namespace detail {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SchemaError(path_ + ": " + msg); }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const Json& raw(const std::string& key) {
    if (!has(key)) fail("missing required key '" + key + "'");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) fail("'" + key + "' must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::int64_t integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail("'" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array()) fail("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail("'" + key + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(raw(key), path_ + "." + key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Potential parse_potential(Reader r) {
  const std::string type = r.string("type");
  Potential p = Potential::zero();
  try {
    if (type == "zero") p = Potential::zero();
    else if (type == "step") p = Potential::step(r.number("height"), r.number("range"));
    else if (type == "exponential") p = Potential::exponential(r.number("amplitude"), r.number("decay"), r.number("range"));
    else if (type == "table") p = Potential::table(r.numbers("radii"), r.numbers("values"));
    else r.fail("unknown potential type '" + type + "' (zero, step, exponential, table)");
  } catch (const InputError& e) {
    r.fail(e.what());
  }
  r.finish();
  return p;
}

inline Potential potential_or_zero(Reader& r, const std::string& key) {
  return r.has(key) ? parse_potential(r.child(key)) : Potential::zero();
}

inline std::optional<PairStability> parse_stability(Reader& r, const std::string& key) {
  if (!r.has(key)) return std::nullopt;
  Reader s = r.child(key);
  PairStability p{s.number("theta"), s.number("b", 0.0)};
  s.finish();
  return p;
}

inline RateModel parse_model(Reader r) {
  const std::string v = r.string("variant");
  ModelVariant mv;
  if (v == "glauber_glauber") {
    GlauberGlauber m;
    m.z_minus = r.number("z_minus");
    m.psi = potential_or_zero(r, "psi");
    m.z_plus = r.number("z_plus");
    m.phi_minus = potential_or_zero(r, "phi_minus");
    m.phi_plus = potential_or_zero(r, "phi_plus");
    mv = m;
  } else if (v == "bdlp_in_glauber") {
    BdlpInGlauber m;
    m.z_minus = r.number("z_minus");
    m.psi = potential_or_zero(r, "psi");
    m.m_plus = r.number("m_plus");
    m.a_minus = potential_or_zero(r, "a_minus");
    m.a_plus = potential_or_zero(r, "a_plus");
    m.b_minus = potential_or_zero(r, "b_minus");
    m.b_plus = potential_or_zero(r, "b_plus");
    m.a_stability = parse_stability(r, "a_stability");
    mv = m;
  } else if (v == "branching_in_glauber") {
    BranchingInGlauber m;
    m.z_minus = r.number("z_minus");
    m.psi = potential_or_zero(r, "psi");
    m.m_plus = r.number("m_plus");
    m.kappa = potential_or_zero(r, "kappa");
    m.phi = potential_or_zero(r, "phi");
    m.a_plus = potential_or_zero(r, "a_plus");
    m.a_stability = parse_stability(r, "a_stability");
    mv = m;
  } else if (v == "two_bdlp") {
    TwoBdlp m;
    m.z = r.number("z");
    m.m_minus = r.number("m_minus");
    m.a_minus = potential_or_zero(r, "a_minus");
    m.a_plus = potential_or_zero(r, "a_plus");
    m.m_plus = r.number("m_plus");
    m.b_minus = potential_or_zero(r, "b_minus");
    m.b_plus = potential_or_zero(r, "b_plus");
    m.vphi_minus = potential_or_zero(r, "vphi_minus");
    m.vphi_plus = potential_or_zero(r, "vphi_plus");
    m.b_stability = parse_stability(r, "b_stability");
    m.a_stability = parse_stability(r, "a_stability");
    mv = m;
  } else {
    r.fail("unknown variant '" + v + "' (glauber_glauber, bdlp_in_glauber, branching_in_glauber, two_bdlp)");
  }
  r.finish();
  try {
    return RateModel(std::move(mv));
  } catch (const InputError& e) {
    r.fail(e.what());
  }
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& doc) {
  detail::Reader r(doc, "config");
  ExperimentConfig c;
  c.source = doc;
  c.model = detail::parse_model(r.child("model"));
  if (r.has("regime")) {
    auto g = r.child("regime");
    c.regime = {g.number("c_minus"), g.number("c_plus", 1.0)};
    g.finish();
    try {
      c.regime.validate();
    } catch (const InputError& e) {
      g.fail(e.what());
    }
  }
  if (r.has("regime_grid")) {
    auto g = r.child("regime_grid");
    c.grid_c_minus = g.numbers("c_minus");
    if (g.has("c_plus")) c.grid_c_plus = g.numbers("c_plus");
    g.finish();
    for (double v : c.grid_c_minus)
      if (!(v > 0.0)) g.fail("grid values must be positive");
    for (double v : c.grid_c_plus)
      if (!(v > 0.0)) g.fail("grid values must be positive");
  }
  {
    auto g = r.child("torus");
    const auto dim = g.integer("dim");
    const double side = g.number("side");
    g.finish();
    try {
      c.torus = Torus(static_cast<int>(dim), side);
      c.model.check_torus(c.torus);
    } catch (const InputError& e) {
      g.fail(e.what());
    }
  }
  if (r.has("hierarchy")) {
    auto g = r.child("hierarchy");
    auto& h = c.hierarchy;
    h.points_per_axis = static_cast<int>(g.integer("points_per_axis", h.points_per_axis));
    h.order = static_cast<int>(g.integer("order", h.order));
    const std::string closure = g.string("closure", "poisson");
    if (closure == "poisson") h.closure = Closure::poisson;
    else if (closure == "zero") h.closure = Closure::zero;
    else g.fail("closure must be 'poisson' or 'zero'");
    h.tol = g.number("tol", h.tol);
    h.max_iter = static_cast<int>(g.integer("max_iter", h.max_iter));
    h.evolve_horizon = g.number("evolve_horizon", h.evolve_horizon);
    h.dt = g.number("dt", h.dt);
    g.finish();
    if (h.points_per_axis < 4) g.fail("points_per_axis must be >= 4");
    if (h.order < 1 || h.order > 4) g.fail("order must lie in [1, 4]");
    if (!(h.tol > 0.0) || h.max_iter < 1) g.fail("tol must be positive and max_iter >= 1");
    if (!(h.evolve_horizon >= 0.0) || h.dt < 0.0) g.fail("evolve_horizon and dt must be >= 0");
  }
  if (r.has("simulation")) {
    auto g = r.child("simulation");
    auto& s = c.simulation;
    if (g.has("epsilons")) s.epsilons = g.numbers("epsilons");
    s.horizon = g.number("horizon", s.horizon);
    s.intervals = static_cast<int>(g.integer("intervals", s.intervals));
    const auto reps = g.integer("replicas", static_cast<std::int64_t>(s.replicas));
    const auto seed = g.integer("seed", static_cast<std::int64_t>(s.seed));
    s.burn_in = g.number("burn_in", s.burn_in);
    const auto max_events = g.integer("max_events", static_cast<std::int64_t>(s.max_events));
    s.initial_density_plus = g.number("initial_density_plus", 0.0);
    s.initial_density_minus = g.number("initial_density_minus", 0.0);
    g.finish();
    if (reps < 1) g.fail("replicas must be >= 1");
    if (seed < 0) g.fail("seed must be >= 0");
    if (max_events < 1) g.fail("max_events must be >= 1");
    if (!(s.horizon > 0.0) || s.intervals < 1) g.fail("horizon must be positive and intervals >= 1");
    if (!(s.burn_in >= 0.0) || !(s.initial_density_plus >= 0.0) || !(s.initial_density_minus >= 0.0))
      g.fail("burn_in and initial densities must be >= 0");
    s.replicas = static_cast<std::size_t>(reps);
    s.seed = static_cast<std::uint64_t>(seed);
    s.max_events = static_cast<std::uint64_t>(max_events);
    try {
      if (!s.epsilons.empty()) validate_epsilons(s.epsilons);
    } catch (const InputError& e) {
      g.fail(e.what());
    }
  }
  if (r.has("ergodicity")) {
    auto g = r.child("ergodicity");
    auto& e = c.ergodicity;
    e.horizon = g.number("horizon", e.horizon);
    e.intervals = static_cast<int>(g.integer("intervals", e.intervals));
    e.high_density_factor = g.number("high_density_factor", e.high_density_factor);
    g.finish();
    if (!(e.horizon > 0.0) || e.intervals < 1 || !(e.high_density_factor >= 0.0))
      g.fail("horizon must be positive, intervals >= 1, high_density_factor >= 0");
  }
  c.output = r.string("output", c.output);
  r.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

/// FNV-1a of the canonical (key-sorted, compact) JSON text.
inline std::uint64_t config_hash(const Json& doc) { return detail::fnv1a(doc.dump()); }

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace sbd
