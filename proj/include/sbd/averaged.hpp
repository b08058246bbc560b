#pragma once

// System dynamics with environment-dependent rates integrated against the environment's
// stationary state.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "sbd/errors.hpp"
#include "sbd/geometry.hpp"
#include "sbd/hierarchy.hpp"
#include "sbd/models.hpp"

namespace sbd {

/// Piecewise-constant function on grid cells (nearest node).
struct GridField {
  GridSpec grid;
  std::vector<double> values;

  double at(const Point& x) const {
    std::array<int, 3> c{};
    for (int a = 0; a < grid.dim(); ++a)
      c[static_cast<std::size_t>(a)] = static_cast<int>(std::lround(x[a] / grid.spacing()));
    return values[grid.index(c)];
  }
  double sup() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

using SpatialField = std::variant<double, GridField>;

inline double field_at(const SpatialField& f, const Point& x) {
  if (const auto* c = std::get_if<double>(&f)) return *c;
  return std::get<GridField>(f).at(x);
}

inline double field_sup(const SpatialField& f) {
  if (const auto* c = std::get_if<double>(&f)) return *c;
  return std::get<GridField>(f).sup();
}

/// Averaged system rates. Field meaning depends on the variant:
///   Glauber system:   birth multiplied by lambda_bar
///   BDLP system:      immigration lambda_bar = rho |b+|, extra death death_shift = rho |b-|
///   branching:        every parent's offspring intensity multiplied by lambda_bar
///   two BDLP:         immigration lambda_bar = rho |vphi+|, extra death death_shift = rho |vphi-|
struct AveragedModel {
  RateModel base;
  SpatialField lambda_bar = 1.0;
  SpatialField death_shift = 0.0;
  double rho_inv = 0.0;
  double lambda_bar_tail = 0.0;  ///< truncation bound on lambda_bar where it comes from an expansion

  void validate() const {
    if (!(field_sup(lambda_bar) >= 0.0) || !(field_sup(death_shift) >= 0.0) || !(rho_inv >= 0.0))
      throw InputError("averaged model: fields must be nonnegative");
    auto nonneg = [](const SpatialField& f) {
      if (const auto* g = std::get_if<GridField>(&f))
        for (double v : g->values)
          if (!(v >= 0.0)) throw InputError("averaged model: fields must be nonnegative");
    };
    nonneg(lambda_bar);
    nonneg(death_shift);
  }
};

/// Averaged model from a solved environment correlation table.
inline AveragedModel build_averaged_model(const RateModel& m, const CorrelationTable& k_inv, const Torus& t) {
  if (!k_inv.solved()) throw StateError("build_averaged_model: correlation table is not a solved stationary table");
  if (k_inv.solved_for() != m.name())
    throw StateError("build_averaged_model: table was solved for " + k_inv.solved_for() + ", not " + m.name());
  if (!(k_inv.grid().torus() == t)) throw StateError("build_averaged_model: table torus differs from the model torus");
  AveragedModel am{m};
  am.rho_inv = std::max(0.0, k_inv.density());
  const int d = t.dim();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          const auto f = exp_functional(k_inv, v.phi_minus);
          am.lambda_bar = std::max(0.0, f.value);
          am.lambda_bar_tail = f.tail_bound;
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          const auto f = exp_functional(k_inv, v.phi);
          am.lambda_bar = std::max(0.0, f.value);
          am.lambda_bar_tail = f.tail_bound;
        } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          am.lambda_bar = am.rho_inv * v.b_plus.l1(d);
          am.death_shift = am.rho_inv * v.b_minus.l1(d);
        } else {
          am.lambda_bar = am.rho_inv * v.vphi_plus.l1(d);
          am.death_shift = am.rho_inv * v.vphi_minus.l1(d);
        }
      },
      m.variant());
  am.validate();
  return am;
}

namespace detail {

inline double avg_death(const Point& x, std::span<const Point> plus, const AveragedModel& am, const Torus& t,
                        std::size_t skip = kNoSkip) {
  const std::span<const Point> none;
  const double base = sys_death(x, plus, none, am.base, t, skip);
  if (am.base.get_if<GlauberGlauber>() || am.base.get_if<BranchingInGlauber>()) return base;
  return base + field_at(am.death_shift, x);
}

inline double avg_birth(const Point& x, std::span<const Point> plus, const AveragedModel& am, const Torus& t) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>)
          return v.z_plus * field_at(am.lambda_bar, x) * std::exp(-energy(x, plus, v.phi_plus, t));
        else if constexpr (std::is_same_v<T, BdlpInGlauber>)
          return energy(x, plus, v.a_plus, t) + field_at(am.lambda_bar, x);
        else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          double b = 0.0;
          for (const auto& y : plus) {
            const double a = v.a_plus.value(torus_distance(x, y, t));
            if (a != 0.0) b += field_at(am.lambda_bar, y) * a;
          }
          return b;
        } else return energy(x, plus, v.b_plus, t) + field_at(am.lambda_bar, x);
      },
      am.base.variant());
}

}  // namespace detail

/// Averaged rates at x given the system configuration (for a death, pass gamma+ \ x).
inline Rates averaged_rates(const Point& x, const FiniteConfiguration& gamma_plus, const AveragedModel& am,
                            const Torus& t) {
  t.check_dim(x);
  return {detail::avg_death(x, gamma_plus.points(), am, t), detail::avg_birth(x, gamma_plus.points(), am, t)};
}

/// Birth proposal for the averaged system; refers to `gamma_plus` and `am`.
inline BirthProposal averaged_birth_proposal(const FiniteConfiguration& gamma_plus, const AveragedModel& am,
                                             const Torus& t) {
  BirthProposal p(t);
  const auto plus = gamma_plus.points();
  const bool uniform_field = std::holds_alternative<double>(am.lambda_bar);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          p.add_uniform(v.z_plus * field_sup(am.lambda_bar));
          if ((!v.phi_plus.is_zero() || !uniform_field) && !p.empty())
            p.set_target([&am, &t, plus](const Point& x) { return detail::avg_birth(x, plus, am, t); });
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          for (const auto& y : plus) p.add_kernel(y, field_at(am.lambda_bar, y), v.a_plus);
        } else {
          const Potential& kern = [&]() -> const Potential& {
            if constexpr (std::is_same_v<T, BdlpInGlauber>) return v.a_plus;
            else return v.b_plus;
          }();
          for (const auto& y : plus) p.add_kernel(y, 1.0, kern);
          p.add_uniform(field_sup(am.lambda_bar));
          if (!uniform_field && !p.empty())
            p.set_target([&am, &t, plus](const Point& x) { return detail::avg_birth(x, plus, am, t); });
        }
      },
      am.base.variant());
  return p;
}

}  // namespace sbd
