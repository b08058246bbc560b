#pragma once

// Regime checker: contraction constants for environment, system and averaged system,
// spectral-gap and sector-angle bounds, a Monte Carlo spot check of the underlying
// inequalities, and feasibility scans over Ruelle weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbd/averaged.hpp"
#include "sbd/errors.hpp"
#include "sbd/geometry.hpp"
#include "sbd/models.hpp"
#include "sbd/potentials.hpp"
#include "sbd/random.hpp"
#include "sbd/regime.hpp"

namespace sbd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ContractionConstants {
  double a_minus = kInf;
  double a_plus = kInf;
  std::vector<std::string> details;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Explicit stability constants, or the pointwise ratio num <= theta * den with b = 0.
inline PairStability resolve_stability(const std::optional<PairStability>& s, const Potential& num,
                                       const Potential& den) {
  if (s) return *s;
  return {pointwise_ratio(num, den), 0.0};
}

inline double finite_or_inf(double v) { return std::isfinite(v) ? v : kInf; }

}  // namespace detail

/// Environment and system contraction constants from the closed-form bounds c <= a M.
inline ContractionConstants contraction_constants(const RateModel& m, const RegimeParams& rp, int dim) {
  rp.validate();
  const double cm = rp.c_minus, cp = rp.c_plus;
  ContractionConstants out;
  auto& log = out.details;
  using detail::fmt;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (!std::is_same_v<T, TwoBdlp>) {
          const double bpsi = v.psi.beta(dim);
          out.a_minus = 1.0 + v.z_minus / cm * std::exp(cm * bpsi);
          log.push_back("environment (Glauber): a- = 1 + z-/C- exp(C- beta(psi)) = 1 + " + fmt(v.z_minus) + "/" +
                        fmt(cm) + " exp(" + fmt(cm) + "*" + fmt(bpsi) + ") = " + fmt(out.a_minus));
        }
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          const double bp = v.phi_plus.beta(dim), bm = v.phi_minus.beta(dim);
          out.a_plus = 1.0 + v.z_plus / cp * std::exp(cp * bp + cm * bm);
          log.push_back("system (Glauber): a+ = 1 + z+/C+ exp(C+ beta(phi+) + C- beta(phi-)) = " + fmt(out.a_plus));
        } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          const auto st = detail::resolve_stability(v.a_stability, v.a_plus, v.a_minus);
          const double vt = pointwise_ratio(v.b_plus, v.b_minus);
          const double lin = (cm * v.b_minus.l1(dim) + cp * v.a_minus.l1(dim) + v.a_plus.l1(dim) +
                              cm / cp * v.b_plus.l1(dim) + st.b / cp) /
                             v.m_plus;
          out.a_plus = 1.0 + std::max({lin, st.theta / cp, vt / cp});
          log.push_back("system (BDLP): theta=" + fmt(st.theta) + " b=" + fmt(st.b) + " vartheta=" + fmt(vt) +
                        "; a+ = 1 + max{" + fmt(lin) + ", " + fmt(st.theta / cp) + ", " + fmt(vt / cp) +
                        "} = " + fmt(out.a_plus));
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          const auto st = detail::resolve_stability(v.a_stability, v.a_plus, v.kappa);
          const double bk = v.kappa.beta_neg(dim);
          const double bphi = v.phi.beta(dim);
          out.a_plus = detail::finite_or_inf(std::exp(cp * bk) + std::exp(cm * bphi) / (v.m_plus * cp) *
                                                                     std::max(cp * v.a_plus.l1(dim) + st.b, st.theta));
          log.push_back("system (branching): vartheta=" + fmt(st.theta) + " b=" + fmt(st.b) + " beta(-kappa)=" +
                        fmt(bk) + "; a+ = exp(C+ beta(-kappa)) + exp(C- beta(phi)) max{C+|a+|+b, vartheta}/(m+ C+) = " +
                        fmt(out.a_plus));
        } else {
          const auto sa = detail::resolve_stability(v.a_stability, v.a_plus, v.a_minus);
          const auto sb = detail::resolve_stability(v.b_stability, v.b_plus, v.b_minus);
          const double v3 = pointwise_ratio(v.vphi_plus, v.vphi_minus);
          const double lin_m = (cm * v.a_minus.l1(dim) + (v.z + sa.b) / cm + v.a_plus.l1(dim)) / v.m_minus;
          out.a_minus = 1.0 + std::max(lin_m, sa.theta / cm);
          log.push_back("environment (BDLP): vartheta2=" + fmt(sa.theta) + " b2=" + fmt(sa.b) + "; a- = 1 + max{" +
                        fmt(lin_m) + ", " + fmt(sa.theta / cm) + "} = " + fmt(out.a_minus));
          const double lin_p = (cp * v.b_minus.l1(dim) + cm * v.vphi_minus.l1(dim) + v.b_plus.l1(dim) +
                                cm / cp * v.vphi_plus.l1(dim) + sb.b / cp) /
                               v.m_plus;
          out.a_plus = 1.0 + std::max({lin_p, sb.theta / cp, v3 / cp});
          log.push_back("system (BDLP): vartheta1=" + fmt(sb.theta) + " b1=" + fmt(sb.b) + " vartheta3=" + fmt(v3) +
                        "; a+ = 1 + max{" + fmt(lin_p) + ", " + fmt(sb.theta / cp) + ", " + fmt(v3 / cp) +
                        "} = " + fmt(out.a_plus));
        }
      },
      m.variant());
  out.a_minus = detail::finite_or_inf(out.a_minus);
  out.a_plus = detail::finite_or_inf(out.a_plus);
  return out;
}

/// Averaged-system constant. Without an averaged model the a-priori bound
/// lambda_bar <= 1 (Glauber-type) or the display without averaged fields is used.
inline double averaged_constants(const RateModel& m, const RegimeParams& rp, int dim,
                                 const AveragedModel* am = nullptr) {
  rp.validate();
  const double cp = rp.c_plus;
  return detail::finite_or_inf(std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          const double lam = am ? field_sup(am->lambda_bar) : 1.0;
          return 1.0 + v.z_plus / cp * lam * std::exp(cp * v.phi_plus.beta(dim));
        } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          const auto st = detail::resolve_stability(v.a_stability, v.a_plus, v.a_minus);
          const double vt = pointwise_ratio(v.b_plus, v.b_minus);
          const double lin = (cp * v.a_minus.l1(dim) + v.a_plus.l1(dim) + st.b / cp) / v.m_plus;
          return 1.0 + std::max({lin, vt / cp, st.theta / cp});
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          const auto st = detail::resolve_stability(v.a_stability, v.a_plus, v.kappa);
          return std::exp(cp * v.kappa.beta_neg(dim)) +
                 std::max(v.a_plus.l1(dim) + st.b / cp, st.theta / cp) / v.m_plus;
        } else {
          const auto sb = detail::resolve_stability(v.b_stability, v.b_plus, v.b_minus);
          if (am) {
            const double up = field_sup(am->lambda_bar);
            const double down = std::get_if<double>(&am->death_shift) ? std::get<double>(am->death_shift) : 0.0;
            const double lin =
                (cp * v.b_minus.l1(dim) + up / cp + v.b_plus.l1(dim) + sb.b / cp) / (v.m_plus + down);
            return 1.0 + std::max(lin, sb.theta / cp);
          }
          const double v3 = pointwise_ratio(v.vphi_plus, v.vphi_minus);
          const double lin = (cp * v.b_minus.l1(dim) + v.b_plus.l1(dim) + sb.b / cp) / v.m_plus;
          return 1.0 + std::max({lin, sb.theta / cp, v3 / cp});
        }
      },
      m.variant()));
}

inline double averaged_constants(const AveragedModel& am, const RegimeParams& rp, int dim) {
  return averaged_constants(am.base, rp, dim, &am);
}

struct GapAndAngle {
  double lambda0 = 0.0;
  double omega0 = 0.0;
  bool feasible = false;
};

/// lambda0 = (2 - a) M*, omega0 = min(pi/4, arccos(a - 1)) for a >= 1 (pi/4 below).
inline GapAndAngle spectral_gap_and_angle(double a_minus, double m_star) {
  if (!(m_star > 0.0)) throw InputError("spectral_gap_and_angle: M* must be positive");
  if (!(a_minus > 0.0)) throw InputError("spectral_gap_and_angle: a must be positive");
  if (!(a_minus < 2.0)) return {0.0, 0.0, false};
  const double quarter = std::numbers::pi / 4.0;
  const double omega = a_minus >= 1.0 ? std::min(quarter, std::acos(a_minus - 1.0)) : quarter;
  return {(2.0 - a_minus) * m_star, omega, true};
}

/// Closed-form infimum of the total death rate over nonempty configurations.
struct DeathInfima {
  double minus = 1.0;
  double plus = 1.0;
  double bar = 1.0;
};

inline DeathInfima death_infima(const RateModel& m, const AveragedModel* am = nullptr) {
  DeathInfima out;
  auto shift = [&]() {
    return am && std::holds_alternative<double>(am->death_shift) ? std::get<double>(am->death_shift) : 0.0;
  };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          out = {1.0, 1.0, 1.0};
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          out = {1.0, v.m_plus, v.m_plus};
        } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          out = {1.0, v.m_plus, v.m_plus + shift()};
        } else {
          out = {v.m_minus, v.m_plus, v.m_plus + shift()};
        }
      },
      m.variant());
  return out;
}

struct SpotCheckOptions {
  int configurations = 1000;  ///< random eta per component
  std::size_t mc_points = 256;
  int max_size = 5;
  double z_score = 5.0;
  std::uint64_t seed = 7;
};

struct SpotCheckResult {
  int checked = 0;
  int failures = 0;
  double worst_excess = -kInf;  ///< max of c - aM - tolerance seen (negative when passing)
  std::vector<std::string> notes;
  bool passed() const noexcept { return failures == 0; }
};

namespace detail {

inline double tail_after(double w, int order) {
  double term = 1.0, tail = 0.0;
  for (int n = 1; n <= order + 80; ++n) {
    term *= w / n;
    if (n > order) tail += term;
  }
  return tail;
}

inline double inv_fact(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return 1.0 / f;
}

inline constexpr int kSpotOrder = 3;

struct SpotRegion {
  std::optional<SamplingBall> ball;
  double volume = 0.0;
};

inline SpotRegion spot_region(const Point& x, double reach, const Torus& t) {
  const double r = 2.0 * reach;
  if (r > 0.0 && r <= 0.5 * t.side()) return {SamplingBall{x, r}, ball_volume(t.dim(), r)};
  return {std::nullopt, t.volume()};
}

inline Point spot_point(const SpotRegion& reg, const Torus& t, CounterRng& rng) {
  if (!reg.ball) return t.uniform_point(rng);
  Point u = uniform_in_ball(t.dim(), reg.ball->radius, rng);
  for (int a = 0; a < t.dim(); ++a) u[a] += reg.ball->center[a];
  return t.wrap(u);
}

/// Two-component truncated Lebesgue-Poisson integral of g(xi+, xi-) over orders
/// 1 <= |xi+| + |xi-| <= kSpotOrder (order 0 excluded), Monte Carlo in a region.
template <class G>
std::pair<double, double> lp_integral_two(G&& g, const SpotRegion& reg, const Torus& t, std::size_t samples,
                                          CounterRng& rng) {
  double value = 0.0, variance = 0.0;
  std::vector<Point> xp, xm;
  for (int np = 0; np <= kSpotOrder; ++np) {
    for (int nm = 0; np + nm <= kSpotOrder; ++nm) {
      if (np + nm == 0) continue;
      double mean = 0.0, m2 = 0.0;
      for (std::size_t s = 0; s < samples; ++s) {
        xp.clear();
        xm.clear();
        for (int i = 0; i < np; ++i) xp.push_back(spot_point(reg, t, rng));
        for (int i = 0; i < nm; ++i) xm.push_back(spot_point(reg, t, rng));
        const double v = g(std::span<const Point>(xp), std::span<const Point>(xm));
        const double delta = v - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (v - mean);
      }
      const double scale = std::pow(reg.volume, np + nm) * inv_fact(np) * inv_fact(nm);
      value += scale * mean;
      variance += scale * scale * m2 / static_cast<double>(samples - 1) / static_cast<double>(samples);
    }
  }
  return {value, std::sqrt(variance)};
}

inline std::vector<Point> concat(std::span<const Point> a, std::span<const Point> b) {
  std::vector<Point> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline FiniteConfiguration clustered_configuration(int n, double spread, const Torus& t, CounterRng& rng) {
  const Point center = t.uniform_point(rng);
  std::vector<Point> pts;
  while (static_cast<int>(pts.size()) < n) {
    Point p = center;
    for (int a = 0; a < t.dim(); ++a) p[a] += rng.uniform(-spread, spread);
    p = t.wrap(p);
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
  }
  return FiniteConfiguration(std::move(pts));
}

// Truncation tails (orders above kSpotOrder) of the c-integrals at one x.
inline double env_tail(const RateModel& m, const Point& x, std::span<const Point> rest, const RegimeParams& rp,
                       const Torus& t) {
  if (m.get_if<TwoBdlp>()) return 0.0;
  return std::visit(
      [&](const auto& v) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoBdlp>) return 0.0;
        else
          return v.z_minus / rp.c_minus * std::exp(-energy(x, rest, v.psi, t)) *
                 tail_after(rp.c_minus * v.psi.beta(t.dim()), kSpotOrder);
      },
      m.variant());
}

inline double sys_tail(const RateModel& m, const Point& x, std::span<const Point> rest_plus,
                       std::span<const Point> minus, const RegimeParams& rp, const Torus& t) {
  const int d = t.dim();
  const double cm = rp.c_minus, cp = rp.c_plus;
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          return v.z_plus / cp * std::exp(-energy(x, rest_plus, v.phi_plus, t) - energy(x, minus, v.phi_minus, t)) *
                 tail_after(cp * v.phi_plus.beta(d) + cm * v.phi_minus.beta(d), kSpotOrder);
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          const double death = v.m_plus * std::exp(energy(x, rest_plus, v.kappa, t)) *
                               tail_after(cp * v.kappa.beta_neg(d), kSpotOrder);
          const double w = cm * v.phi.beta(d);
          const double near = energy(x, rest_plus, v.a_plus, t);
          const double birth = (near * tail_after(w, kSpotOrder) + cp * v.a_plus.l1(d) * tail_after(w, kSpotOrder - 1)) / cp;
          return death + birth;
        } else {
          return 0.0;
        }
      },
      m.variant());
}

}  // namespace detail

/// Monte Carlo check of c-(eta) <= a- M-(eta) and c+(eta) <= a+ M+(eta) on random
/// clustered configurations; c-integrals use the decomposition kernels.
inline SpotCheckResult spot_check(const RateModel& m, const RegimeParams& rp, const Torus& t,
                                  const ContractionConstants& cc, const SpotCheckOptions& opt = {}) {
  rp.validate();
  m.check_torus(t);
  SpotCheckResult res;
  CounterRng rng(opt.seed, 0x5907);
  const double reach = std::max(m.interaction_reach(), 1e-9);
  const double spread = std::min(reach, 0.5 * t.side());
  const double cm = rp.c_minus, cp = rp.c_plus;
  std::uint64_t stream = 1;
  auto record = [&](double c, double bound, double tol, const std::string& what) {
    ++res.checked;
    const double excess = c - bound - tol;
    res.worst_excess = std::max(res.worst_excess, excess);
    if (excess > 0.0) {
      ++res.failures;
      if (res.notes.size() < 5)
        res.notes.push_back(what + ": c=" + detail::fmt(c) + " > aM=" + detail::fmt(bound) + " (+tol " +
                            detail::fmt(tol) + ")");
    }
  };

  // Environment.
  if (std::isfinite(cc.a_minus)) {
    for (int s = 0; s < opt.configurations; ++s) {
      const int n = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(opt.max_size)));
      const FiniteConfiguration eta = detail::clustered_configuration(n, spread, t, rng);
      double c = 0.0, var = 0.0, tail = 0.0, big_m = 0.0;
      for (std::size_t i = 0; i < eta.size(); ++i) {
        const Point& x = eta[i];
        const FiniteConfiguration rest = eta.without(i);
        big_m += detail::env_death(x, rest.points(), m, t);
        const auto reg = detail::spot_region(x, reach, t);
        const MonteCarloQuadrature mc{opt.mc_points, opt.seed, stream++, reg.ball};
        for (int kind = 0; kind < 2; ++kind) {
          auto g = [&](std::span<const Point> xi) {
            const double s_sum = subsets_sum(rest.points(), [&](std::span<const Point> zeta) {
              const auto cfg = detail::concat(zeta, xi);
              const auto [dk, bk] = environment_kernel_values(m, x, cfg, t);
              return kind == 0 ? dk : bk;
            });
            return std::abs(s_sum) * std::pow(cm, static_cast<double>(xi.size()));
          };
          const auto est = lp_integral(g, detail::kSpotOrder, t, mc);
          const double w = kind == 0 ? 1.0 : 1.0 / cm;
          c += w * est.value;
          var += w * w * est.std_error * est.std_error;
        }
        tail += detail::env_tail(m, x, rest.points(), rp, t);
      }
      record(c, cc.a_minus * big_m, opt.z_score * std::sqrt(var) + tail + 1e-9 * (1.0 + big_m),
             "environment |eta|=" + std::to_string(n));
    }
  }

  // System.
  if (std::isfinite(cc.a_plus)) {
    for (int s = 0; s < opt.configurations; ++s) {
      const int np = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(opt.max_size)));
      const int nm = static_cast<int>(rng.index(static_cast<std::uint64_t>(opt.max_size - np + 1)));
      const FiniteConfiguration all = detail::clustered_configuration(np + nm, spread, t, rng);
      std::vector<Point> vp(all.begin(), all.begin() + np), vm(all.begin() + np, all.end());
      const FiniteConfiguration plus(vp), minus(vm);
      double c = 0.0, var = 0.0, tail = 0.0, big_m = 0.0;
      for (std::size_t i = 0; i < plus.size(); ++i) {
        const Point& x = plus[i];
        const MarkedConfiguration rest{plus.without(i), minus};
        big_m += detail::sys_death(x, rest.plus.points(), minus.points(), m, t);
        const auto reg = detail::spot_region(x, reach, t);
        CounterRng mc_rng(opt.seed, stream++);
        for (int kind = 0; kind < 2; ++kind) {
          auto g = [&](std::span<const Point> xip, std::span<const Point> xim) {
            const double s_sum = subsets_sum(rest, [&](std::span<const Point> zp, std::span<const Point> zm) {
              const auto cp_cfg = detail::concat(zp, xip);
              const auto cm_cfg = detail::concat(zm, xim);
              const auto [dk, bk] = system_kernel_values(m, x, cp_cfg, cm_cfg, t);
              return kind == 0 ? dk : bk;
            });
            return std::abs(s_sum) * std::pow(cp, static_cast<double>(xip.size())) *
                   std::pow(cm, static_cast<double>(xim.size()));
          };
          // Order zero exactly.
          const double zero = g(std::span<const Point>(), std::span<const Point>());
          const auto [val, err] = detail::lp_integral_two(g, reg, t, opt.mc_points, mc_rng);
          const double w = kind == 0 ? 1.0 : 1.0 / cp;
          c += w * (zero + val);
          var += w * w * err * err;
        }
        tail += detail::sys_tail(m, x, rest.plus.points(), minus.points(), rp, t);
      }
      record(c, cc.a_plus * big_m, opt.z_score * std::sqrt(var) + tail + 1e-9 * (1.0 + big_m),
             "system |eta+|=" + std::to_string(np) + " |eta-|=" + std::to_string(nm));
    }
  }
  return res;
}

struct ConditionReport {
  RegimeParams regime;
  double a_minus = kInf, a_plus = kInf, a_bar = kInf;
  double m_star_minus = 0.0, m_star_plus = 0.0, m_star_bar = 0.0;
  double lambda0 = 0.0;
  double omega0 = 0.0;
  bool e2_ok = false, s2_ok = false, av2_ok = false, e3_sufficient_ok = false;
  std::vector<std::string> details;
  std::optional<SpotCheckResult> spot;

  bool all_ok() const noexcept {
    return e2_ok && s2_ok && av2_ok && e3_sufficient_ok && (!spot || spot->passed());
  }
};

struct CheckOptions {
  bool spot_check = true;
  SpotCheckOptions spot;
  std::optional<Torus> torus;  ///< spot-check domain; a torus of side 10 * reach by default
  int dim = 1;
};

/// Linear birth bound b(x, eta) <= A (1 + |eta|) for environment and system.
inline std::pair<bool, std::string> linear_birth_bound(const RateModel& m) {
  return std::visit(
      [](const auto& v) -> std::pair<bool, std::string> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>)
          return {true, "birth rates bounded by z- = " + detail::fmt(v.z_minus) + " and z+ = " + detail::fmt(v.z_plus)};
        else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          const double a = std::max({v.z_minus, v.a_plus.sup(), v.b_plus.sup()});
          return {std::isfinite(a), "b- <= z-, b+ <= |eta+| sup a+ + |eta-| sup b+; A = " + detail::fmt(a)};
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          const double a = std::max(v.z_minus, v.a_plus.sup());
          return {std::isfinite(a), "b- <= z-, b+ <= |eta+| sup a+; A = " + detail::fmt(a)};
        } else {
          const double a = std::max({v.z, v.a_plus.sup(), v.b_plus.sup(), v.vphi_plus.sup()});
          return {std::isfinite(a), "b- <= z + |eta-| sup a+, b+ <= |eta+| sup b+ + |eta-| sup vphi+; A = " +
                                        detail::fmt(a)};
        }
      },
      m.variant());
}

inline ConditionReport check_regime(const RateModel& m, const RegimeParams& rp, const CheckOptions& opt = {},
                                    const AveragedModel* am = nullptr) {
  rp.validate();
  const int dim = opt.torus ? opt.torus->dim() : opt.dim;
  ConditionReport r;
  r.regime = rp;
  const auto cc = contraction_constants(m, rp, dim);
  r.a_minus = cc.a_minus;
  r.a_plus = cc.a_plus;
  r.details = cc.details;
  r.a_bar = averaged_constants(m, rp, dim, am);
  r.details.push_back("averaged: a_bar = " + detail::fmt(r.a_bar) +
                      (am ? " (from the averaged model)" : " (a-priori bound)"));
  const auto inf = death_infima(m, am);
  r.m_star_minus = inf.minus;
  r.m_star_plus = inf.plus;
  r.m_star_bar = inf.bar;
  r.e2_ok = r.a_minus < 2.0;
  r.s2_ok = r.a_plus < 2.0;
  r.av2_ok = r.a_bar < 2.0;
  const auto [e3, e3_note] = linear_birth_bound(m);
  r.e3_sufficient_ok = e3;
  r.details.push_back("linear birth bound: " + e3_note);
  if (r.e2_ok) {
    const auto ga = spectral_gap_and_angle(r.a_minus, r.m_star_minus);
    r.lambda0 = ga.lambda0;
    r.omega0 = ga.omega0;
    r.details.push_back("lambda0 = (2 - a-) M* = (2 - " + detail::fmt(r.a_minus) + ") * " +
                        detail::fmt(r.m_star_minus) + " = " + detail::fmt(r.lambda0));
  } else {
    r.details.push_back("environment contraction fails: a- = " + detail::fmt(r.a_minus) + " >= 2");
  }
  if (!r.s2_ok) r.details.push_back("system contraction fails: a+ = " + detail::fmt(r.a_plus) + " >= 2");
  if (!r.av2_ok) r.details.push_back("averaged contraction fails: a_bar = " + detail::fmt(r.a_bar) + " >= 2");
  if (opt.spot_check) {
    const double reach = std::max(m.interaction_reach(), 0.1);
    const Torus t = opt.torus ? *opt.torus : Torus(dim, 10.0 * reach);
    r.spot = spot_check(m, rp, t, cc, opt.spot);
    r.details.push_back("spot check: " + std::to_string(r.spot->checked) + " inequalities, " +
                        std::to_string(r.spot->failures) + " failures");
    for (const auto& n : r.spot->notes) r.details.push_back("  " + n);
  }
  return r;
}

enum class ScanScope { full, environment_only };

struct ScanResult {
  bool feasible = false;
  ConditionReport report;
  std::size_t evaluated = 0;
};

/// Best grid point by lambda0 among feasible ones; ties go to the smallest C-, then C+.
inline ScanResult scan_feasible(const RateModel& m, std::span<const RegimeParams> grid, const CheckOptions& opt = {},
                                ScanScope scope = ScanScope::full, const AveragedModel* am = nullptr) {
  if (grid.empty()) throw InputError("scan_feasible: empty grid");
  CheckOptions quick = opt;
  quick.spot_check = false;
  ScanResult out;
  std::optional<ConditionReport> best;
  for (const auto& rp : grid) {
    auto rep = check_regime(m, rp, quick, am);
    ++out.evaluated;
    const bool ok = scope == ScanScope::full ? rep.all_ok() : (rep.e2_ok && rep.e3_sufficient_ok);
    if (!ok) continue;
    const bool better =
        !best || rep.lambda0 > best->lambda0 ||
        (rep.lambda0 == best->lambda0 &&
         (rp.c_minus < best->regime.c_minus ||
          (rp.c_minus == best->regime.c_minus && rp.c_plus < best->regime.c_plus)));
    if (better) best = std::move(rep);
  }
  if (!best) {
    out.report = check_regime(m, grid.front(), quick, am);
    out.report.details.push_back("no grid point satisfies the required conditions");
    return out;
  }
  out.feasible = true;
  out.report = opt.spot_check ? check_regime(m, best->regime, opt, am) : *best;
  if (out.report.spot && !out.report.spot->passed()) out.feasible = false;
  return out;
}

/// Product grid of Ruelle weights.
inline std::vector<RegimeParams> regime_grid(std::span<const double> c_minus, std::span<const double> c_plus) {
  std::vector<RegimeParams> g;
  for (double a : c_minus)
    for (double b : c_plus) g.push_back({a, b});
  return g;
}

}  // namespace sbd
