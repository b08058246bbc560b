#pragma once

// The four two-component rate models: pointwise rates, their finite-difference
// kernels, and exact birth proposals for event-driven simulation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sbd/errors.hpp"
#include "sbd/geometry.hpp"
#include "sbd/potentials.hpp"
#include "sbd/random.hpp"

namespace sbd {

/// Stability pair for sum_{x,y} f^+(x-y) <= theta * sum_{x,y} f^-(x-y) + b |eta|.
struct PairStability {
  double theta = 0.0;
  double b = 0.0;
};

struct GlauberGlauber {
  double z_minus = 0.0;
  Potential psi;
  double z_plus = 0.0;
  Potential phi_minus;
  Potential phi_plus;
};

struct BdlpInGlauber {
  double z_minus = 0.0;
  Potential psi;
  double m_plus = 1.0;
  Potential a_minus;
  Potential a_plus;
  Potential b_minus;
  Potential b_plus;
  std::optional<PairStability> a_stability;  ///< a^+ against a^-; pointwise ratio when absent
};

struct BranchingInGlauber {
  double z_minus = 0.0;
  Potential psi;
  double m_plus = 1.0;
  Potential kappa;
  Potential phi;
  Potential a_plus;
  std::optional<PairStability> a_stability;  ///< a^+ against kappa
};

struct TwoBdlp {
  double z = 0.0;
  double m_minus = 1.0;
  Potential a_minus;
  Potential a_plus;
  double m_plus = 1.0;
  Potential b_minus;
  Potential b_plus;
  Potential vphi_minus;
  Potential vphi_plus;
  std::optional<PairStability> b_stability;  ///< b^+ against b^- (system)
  std::optional<PairStability> a_stability;  ///< a^+ against a^- (environment)
};

using ModelVariant = std::variant<GlauberGlauber, BdlpInGlauber, BranchingInGlauber, TwoBdlp>;

/// Growth bound A (1+|eta|)^N e^{nu |eta|}; recorded, not verified.
struct GrowthBound {
  double a = 1.0;
  int n = 0;
  double nu = 0.0;
};

/// sup_r num(r)/den(r) over the support of num, sampled densely plus at breakpoints.
/// Infinite when num > 0 somewhere den vanishes.
inline double pointwise_ratio(const Potential& num, const Potential& den) {
  if (num.is_zero()) return 0.0;
  const double r0 = num.cutoff();
  std::vector<double> radii;
  constexpr int kSamples = 4000;
  for (int i = 0; i <= kSamples; ++i) radii.push_back(r0 * i / kSamples);
  for (double b : num.breakpoints()) {
    radii.push_back(b);
    radii.push_back(b * (1.0 - 1e-9));
  }
  for (double b : den.breakpoints()) {
    radii.push_back(b);
    radii.push_back(b * (1.0 + 1e-9));
  }
  double worst = 0.0;
  for (double r : radii) {
    if (r < 0.0 || r > r0) continue;
    const double n = num.value(r);
    if (n <= 0.0) continue;
    const double d = den.value(r);
    if (d <= 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, n / d);
  }
  return worst;
}

class RateModel {
 public:
  explicit RateModel(ModelVariant v) : v_(std::move(v)) { validate(); }

  const ModelVariant& variant() const noexcept { return v_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&v_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, GlauberGlauber>) return "glauber_glauber";
          else if constexpr (std::is_same_v<T, BdlpInGlauber>) return "bdlp_in_glauber";
          else if constexpr (std::is_same_v<T, BranchingInGlauber>) return "branching_in_glauber";
          else return "two_bdlp";
        },
        v_);
  }

  /// Environment is a Glauber dynamics (variants 1-3) rather than a BDLP model.
  bool glauber_environment() const noexcept { return !std::holds_alternative<TwoBdlp>(v_); }

  std::vector<std::pair<std::string, const Potential*>> potentials() const {
    return std::visit(
        [](const auto& m) -> std::vector<std::pair<std::string, const Potential*>> {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, GlauberGlauber>)
            return {{"psi", &m.psi}, {"phi_minus", &m.phi_minus}, {"phi_plus", &m.phi_plus}};
          else if constexpr (std::is_same_v<T, BdlpInGlauber>)
            return {{"psi", &m.psi},         {"a_minus", &m.a_minus}, {"a_plus", &m.a_plus},
                    {"b_minus", &m.b_minus}, {"b_plus", &m.b_plus}};
          else if constexpr (std::is_same_v<T, BranchingInGlauber>)
            return {{"psi", &m.psi}, {"kappa", &m.kappa}, {"phi", &m.phi}, {"a_plus", &m.a_plus}};
          else
            return {{"a_minus", &m.a_minus},       {"a_plus", &m.a_plus},         {"b_minus", &m.b_minus},
                    {"b_plus", &m.b_plus},         {"vphi_minus", &m.vphi_minus}, {"vphi_plus", &m.vphi_plus}};
        },
        v_);
  }

  /// Largest cutoff over all potentials.
  double interaction_reach() const {
    double r = 0.0;
    for (const auto& [name, p] : potentials()) r = std::max(r, p->cutoff());
    return r;
  }

  void check_torus(const Torus& t) const {
    for (const auto& [name, p] : potentials()) check_cutoff(*p, t, name);
  }

  GrowthBound environment_growth() const {
    return std::visit(
        [](const auto& m) -> GrowthBound {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, TwoBdlp>)
            return {std::max({m.m_minus + m.z, m.a_minus.sup() + m.a_plus.sup(), 1.0}), 1, 0.0};
          else return {1.0 + m.z_minus, 0, 0.0};
        },
        v_);
  }

  GrowthBound system_growth() const {
    return std::visit(
        [](const auto& m) -> GrowthBound {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, GlauberGlauber>) return {1.0 + m.z_plus, 0, 0.0};
          else if constexpr (std::is_same_v<T, BdlpInGlauber>)
            return {m.m_plus + m.a_minus.sup() + m.a_plus.sup() + m.b_minus.sup() + m.b_plus.sup(), 1, 0.0};
          else if constexpr (std::is_same_v<T, BranchingInGlauber>)
            return {m.m_plus + m.a_plus.sup(), 1, m.kappa.sup()};
          else return {m.m_plus + m.b_minus.sup() + m.b_plus.sup() + m.vphi_minus.sup() + m.vphi_plus.sup(), 1, 0.0};
        },
        v_);
  }

 private:
  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string("model: ") + what + " must be positive");
    };
    auto nonneg = [](double v, const char* what) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(std::string("model: ") + what + " must be >= 0");
    };
    auto stab = [](const std::optional<PairStability>& s) {
      if (s && (!(s->theta >= 0.0) || !(s->b >= 0.0)))
        throw InputError("model: stability constants must be >= 0");
    };
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, GlauberGlauber>) {
            nonneg(m.z_minus, "z_minus");
            nonneg(m.z_plus, "z_plus");
          } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
            nonneg(m.z_minus, "z_minus");
            positive(m.m_plus, "m_plus");
            stab(m.a_stability);
          } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
            nonneg(m.z_minus, "z_minus");
            positive(m.m_plus, "m_plus");
            stab(m.a_stability);
          } else {
            nonneg(m.z, "z");
            positive(m.m_minus, "m_minus");
            positive(m.m_plus, "m_plus");
            stab(m.a_stability);
            stab(m.b_stability);
          }
        },
        v_);
  }

  ModelVariant v_;
};

struct Rates {
  double death = 0.0;
  double birth = 0.0;
};

namespace detail {

inline constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

inline double energy(const Point& x, std::span<const Point> cfg, const Potential& pot, const Torus& t,
                     std::size_t skip = kNoSkip) {
  if (pot.is_zero()) return 0.0;
  const double r0 = pot.cutoff();
  double e = 0.0;
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    if (i == skip) continue;
    const double r = torus_distance(x, cfg[i], t);
    if (r <= r0) e += pot.value(r);
  }
  return e;
}

/// prod_{y in cfg} (e^{-sign*pot(x-y)} - 1)
inline double mayer_product(const Point& x, std::span<const Point> cfg, const Potential& pot, const Torus& t,
                            double sign = 1.0) {
  double p = 1.0;
  for (const auto& y : cfg) {
    p *= std::expm1(-sign * pot.value(torus_distance(x, y, t)));
    if (p == 0.0) return 0.0;
  }
  return p;
}

inline double zero_pow(std::size_t n) { return n == 0 ? 1.0 : 0.0; }

/// 1_{|cfg|=1} f(x - y)
inline double singleton_pair(const Point& x, std::span<const Point> cfg, const Potential& pot, const Torus& t) {
  return cfg.size() == 1 ? pot.value(torus_distance(x, cfg[0], t)) : 0.0;
}

inline double env_death(const Point& x, std::span<const Point> minus, const RateModel& m, const Torus& t,
                        std::size_t skip = kNoSkip) {
  if (const auto* b = m.get_if<TwoBdlp>()) return b->m_minus + energy(x, minus, b->a_minus, t, skip);
  return 1.0;
}

inline double env_birth(const Point& x, std::span<const Point> minus, const RateModel& m, const Torus& t) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TwoBdlp>) return energy(x, minus, v.a_plus, t) + v.z;
        else return v.z_minus * std::exp(-energy(x, minus, v.psi, t));
      },
      m.variant());
}

inline double sys_death(const Point& x, std::span<const Point> plus, std::span<const Point> minus,
                        const RateModel& m, const Torus& t, std::size_t skip = kNoSkip) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) return 1.0;
        else if constexpr (std::is_same_v<T, BdlpInGlauber>)
          return v.m_plus + energy(x, plus, v.a_minus, t, skip) + energy(x, minus, v.b_minus, t);
        else if constexpr (std::is_same_v<T, BranchingInGlauber>)
          return v.m_plus * std::exp(energy(x, plus, v.kappa, t, skip));
        else return v.m_plus + energy(x, plus, v.b_minus, t, skip) + energy(x, minus, v.vphi_minus, t);
      },
      m.variant());
}

inline double sys_birth(const Point& x, std::span<const Point> plus, std::span<const Point> minus,
                        const RateModel& m, const Torus& t) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>)
          return v.z_plus * std::exp(-energy(x, minus, v.phi_minus, t) - energy(x, plus, v.phi_plus, t));
        else if constexpr (std::is_same_v<T, BdlpInGlauber>)
          return energy(x, plus, v.a_plus, t) + energy(x, minus, v.b_plus, t);
        else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          double b = 0.0;
          const double r0 = v.a_plus.cutoff();
          for (const auto& y : plus) {
            const double r = torus_distance(x, y, t);
            if (r > r0) continue;
            const double a = v.a_plus.value(r);
            if (a != 0.0) b += std::exp(-energy(y, minus, v.phi, t)) * a;
          }
          return b;
        } else return energy(x, plus, v.b_plus, t) + energy(x, minus, v.vphi_plus, t);
      },
      m.variant());
}

}  // namespace detail

/// Environment rates at x given gamma^- (for a death, pass gamma^- \ x).
inline Rates env_rates(const Point& x, const FiniteConfiguration& gamma_minus, const RateModel& m,
                       const Torus& t) {
  t.check_dim(x);
  return {detail::env_death(x, gamma_minus.points(), m, t), detail::env_birth(x, gamma_minus.points(), m, t)};
}

/// System rates at x given gamma (for a death, pass gamma^+ \ x as the system component).
inline Rates sys_rates(const Point& x, const MarkedConfiguration& gamma, const RateModel& m, const Torus& t) {
  t.check_dim(x);
  return {detail::sys_death(x, gamma.plus.points(), gamma.minus.points(), m, t),
          detail::sys_birth(x, gamma.plus.points(), gamma.minus.points(), m, t)};
}

/// Finite-difference kernels at (x, eta); their subset sums reproduce the rates.
struct DecompositionKernels {
  double d_minus = 0.0;
  double b_minus = 0.0;
  double d_plus = 0.0;
  double b_plus = 0.0;
};

inline std::pair<double, double> environment_kernel_values(const RateModel& m, const Point& x,
                                                           std::span<const Point> eta_minus, const Torus& t) {
  using detail::singleton_pair;
  using detail::zero_pow;
  if (const auto* v = m.get_if<TwoBdlp>()) {
    return {v->m_minus * zero_pow(eta_minus.size()) + singleton_pair(x, eta_minus, v->a_minus, t),
            v->z * zero_pow(eta_minus.size()) + singleton_pair(x, eta_minus, v->a_plus, t)};
  }
  const double z = std::visit(
      [](const auto& v) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoBdlp>) return 0.0;
        else return v.z_minus;
      },
      m.variant());
  const Potential& psi = std::visit(
      [](const auto& v) -> const Potential& {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoBdlp>) return v.a_minus;
        else return v.psi;
      },
      m.variant());
  return {zero_pow(eta_minus.size()), z * detail::mayer_product(x, eta_minus, psi, t)};
}

inline std::pair<double, double> system_kernel_values(const RateModel& m, const Point& x,
                                                      std::span<const Point> plus, std::span<const Point> minus,
                                                      const Torus& t) {
  using detail::singleton_pair;
  using detail::zero_pow;
  const std::size_t np = plus.size(), nm = minus.size();
  return std::visit(
      [&](const auto& v) -> std::pair<double, double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          return {zero_pow(np + nm), v.z_plus * detail::mayer_product(x, plus, v.phi_plus, t) *
                                         detail::mayer_product(x, minus, v.phi_minus, t)};
        } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          const double d = v.m_plus * zero_pow(np + nm) + zero_pow(nm) * singleton_pair(x, plus, v.a_minus, t) +
                           zero_pow(np) * singleton_pair(x, minus, v.b_minus, t);
          const double b = zero_pow(nm) * singleton_pair(x, plus, v.a_plus, t) +
                           zero_pow(np) * singleton_pair(x, minus, v.b_plus, t);
          return {d, b};
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          const double d = zero_pow(nm) * v.m_plus * detail::mayer_product(x, plus, v.kappa, t, -1.0);
          double b = 0.0;
          if (np == 1) {
            const Point& y = plus[0];
            // The environment damping acts through the parent position y.
            b = detail::mayer_product(y, minus, v.phi, t) * v.a_plus.value(torus_distance(x, y, t));
          }
          return {d, b};
        } else {
          const double d = v.m_plus * zero_pow(np + nm) + zero_pow(nm) * singleton_pair(x, plus, v.b_minus, t) +
                           zero_pow(np) * singleton_pair(x, minus, v.vphi_minus, t);
          const double b = zero_pow(nm) * singleton_pair(x, plus, v.b_plus, t) +
                           zero_pow(np) * singleton_pair(x, minus, v.vphi_plus, t);
          return {d, b};
        }
      },
      m.variant());
}

inline DecompositionKernels decomposition_kernels(const RateModel& m, const Point& x, const MarkedConfiguration& eta,
                                                  const Torus& t) {
  if (eta.size() > kSubsetEnumerationCap)
    throw SizeError("decomposition_kernels: configuration larger than " + std::to_string(kSubsetEnumerationCap));
  t.check_dim(x);
  const auto [dm, bm] = environment_kernel_values(m, x, eta.minus.points(), t);
  const auto [dp, bp] = system_kernel_values(m, x, eta.plus.points(), eta.minus.points(), t);
  return {dm, bm, dp, bp};
}

/// Environment kernel in structured form
///   K(x, xi) = constant 0^{|xi|} + 1_{|xi|=1} pair(x - y) + amplitude prod_{y in xi}(e^{-product(x-y)} - 1)
/// which is what the correlation-function solver integrates against.
struct KernelForm {
  double constant = 0.0;
  const Potential* pair = nullptr;
  double product_amplitude = 0.0;
  const Potential* product = nullptr;

  double operator()(const Point& x, std::span<const Point> xi, const Torus& t) const {
    double v = constant * detail::zero_pow(xi.size());
    if (pair) v += detail::singleton_pair(x, xi, *pair, t);
    if (product_amplitude != 0.0)
      v += product_amplitude * (product ? detail::mayer_product(x, xi, *product, t) : detail::zero_pow(xi.size()));
    return v;
  }
};

struct EnvironmentKernels {
  KernelForm death;
  KernelForm birth;
};

inline EnvironmentKernels environment_kernels(const RateModel& m) {
  if (const auto* v = m.get_if<TwoBdlp>())
    return {KernelForm{v->m_minus, &v->a_minus, 0.0, nullptr}, KernelForm{v->z, &v->a_plus, 0.0, nullptr}};
  return std::visit(
      [](const auto& v) -> EnvironmentKernels {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoBdlp>) return {};
        else return {KernelForm{1.0, nullptr, 0.0, nullptr}, KernelForm{0.0, nullptr, v.z_minus, &v.psi}};
      },
      m.variant());
}

/// One mixture component of a dominating birth intensity: uniform with density
/// `weight`, or weight * kernel(x - anchor).
struct ProposalComponent {
  double weight = 0.0;
  std::optional<Point> anchor;
  const Potential* kernel = nullptr;
  double mass = 0.0;
};

/// Dominating birth intensity on the torus plus the acceptance that thins it to the
/// true birth density. Holds pointers into the model: keep the model alive while in use.
class BirthProposal {
 public:
  explicit BirthProposal(const Torus& t) : torus_(t) {}

  void add_uniform(double density) {
    if (!(density > 0.0)) return;
    components_.push_back({density, std::nullopt, nullptr, density * torus_.volume()});
    total_ += components_.back().mass;
  }

  void add_kernel(const Point& anchor, double weight, const Potential& kernel) {
    const double mass = weight * kernel.l1(torus_.dim());
    if (!(mass > 0.0)) return;
    components_.push_back({weight, anchor, &kernel, mass});
    total_ += mass;
  }

  /// Declares the true birth density when it differs from the dominating one.
  void set_target(std::function<double(const Point&)> density) { target_ = std::move(density); }

  double total_mass() const noexcept { return total_; }
  bool empty() const noexcept { return components_.empty(); }
  bool exact() const noexcept { return !target_; }
  std::span<const ProposalComponent> components() const noexcept { return components_; }

  double dominating_density(const Point& x) const {
    double s = 0.0;
    for (const auto& c : components_) {
      if (!c.anchor) s += c.weight;
      else s += c.weight * c.kernel->value(torus_distance(x, *c.anchor, torus_));
    }
    return s;
  }

  double birth_density(const Point& x) const { return target_ ? target_(x) : dominating_density(x); }

  double acceptance(const Point& x) const {
    if (!target_) return 1.0;
    const double dom = dominating_density(x);
    if (dom <= 0.0) return 0.0;
    return std::clamp(target_(x) / dom, 0.0, 1.0);
  }

  Point sample_candidate(CounterRng& rng) const {
    if (components_.empty()) throw StateError("BirthProposal: no birth channel");
    double u = rng.uniform() * total_;
    const ProposalComponent* chosen = &components_.back();
    for (const auto& c : components_) {
      if (u < c.mass) {
        chosen = &c;
        break;
      }
      u -= c.mass;
    }
    if (!chosen->anchor) return torus_.uniform_point(rng);
    const Potential& k = *chosen->kernel;
    const double r0 = k.cutoff(), top = k.sup();
    for (;;) {
      Point u_off = uniform_in_ball(torus_.dim(), r0, rng);
      double r2 = 0.0;
      for (int i = 0; i < torus_.dim(); ++i) r2 += u_off[i] * u_off[i];
      if (rng.uniform() * top < k.value(std::sqrt(r2))) {
        for (int i = 0; i < torus_.dim(); ++i) u_off[i] += (*chosen->anchor)[i];
        return torus_.wrap(u_off);
      }
    }
  }

  const Torus& torus() const noexcept { return torus_; }

 private:
  Torus torus_;
  std::vector<ProposalComponent> components_;
  double total_ = 0.0;
  std::function<double(const Point&)> target_;
};

enum class Component { system, environment };

/// Birth proposal for one component at the current configuration. The returned object
/// refers to `gamma` and `m`; both must outlive it.
inline BirthProposal birth_proposal(Component component, const MarkedConfiguration& gamma, const RateModel& m,
                                    const Torus& t) {
  BirthProposal p(t);
  const auto plus = gamma.plus.points();
  const auto minus = gamma.minus.points();
  if (component == Component::environment) {
    if (const auto* v = m.get_if<TwoBdlp>()) {
      p.add_uniform(v->z);
      for (const auto& y : minus) p.add_kernel(y, 1.0, v->a_plus);
      return p;
    }
    const auto& g = std::visit(
        [](const auto& v) -> std::pair<double, const Potential*> {
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TwoBdlp>) return {0.0, nullptr};
          else return {v.z_minus, &v.psi};
        },
        m.variant());
    p.add_uniform(g.first);
    if (!g.second->is_zero() && !p.empty())
      p.set_target([&m, &t, minus](const Point& x) { return detail::env_birth(x, minus, m, t); });
    return p;
  }
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GlauberGlauber>) {
          p.add_uniform(v.z_plus);
          if ((!v.phi_plus.is_zero() || !v.phi_minus.is_zero()) && !p.empty())
            p.set_target([&m, &t, plus, minus](const Point& x) { return detail::sys_birth(x, plus, minus, m, t); });
        } else if constexpr (std::is_same_v<T, BdlpInGlauber>) {
          for (const auto& y : plus) p.add_kernel(y, 1.0, v.a_plus);
          for (const auto& y : minus) p.add_kernel(y, 1.0, v.b_plus);
        } else if constexpr (std::is_same_v<T, BranchingInGlauber>) {
          // Parent damping evaluated now from the current environment.
          for (const auto& y : plus) p.add_kernel(y, std::exp(-detail::energy(y, minus, v.phi, t)), v.a_plus);
        } else {
          for (const auto& y : plus) p.add_kernel(y, 1.0, v.b_plus);
          for (const auto& y : minus) p.add_kernel(y, 1.0, v.vphi_plus);
        }
      },
      m.variant());
  return p;
}

}  // namespace sbd
