#pragma once

// Radial pair kernels with compact support and the integrals built from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sbd/errors.hpp"
#include "sbd/geometry.hpp"

namespace sbd {

struct ZeroProfile {};
struct StepProfile {
  double height = 0.0;
  double range = 0.0;
};
struct ExponentialProfile {
  double amplitude = 0.0;
  double decay = 0.0;
  double range = 0.0;
};
/// Piecewise linear through (radii[i], values[i]); values[0] below radii[0]; 0 beyond the last radius.
struct TableProfile {
  std::vector<double> radii;
  std::vector<double> values;
};

using Profile = std::variant<ZeroProfile, StepProfile, ExponentialProfile, TableProfile>;

struct PotentialFunctionals {
  double beta = 0.0;      ///< int |e^{-f} - 1|
  double beta_neg = 0.0;  ///< int |e^{f} - 1|, +inf when it overflows
  double l1 = 0.0;
  double linf = 0.0;
};

enum class BetaSign { plus, minus };

namespace detail {

inline double surface_factor(int dim, double r) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI * r;
    case 3: return 4.0 * M_PI * r * r;
    default: throw InputError("dimension must be 1, 2 or 3");
  }
}

template <class F>
double gk_integrate(F&& f, double a, double b, double tol = 1e-12) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &err);
}

/// Sorted breakpoints in [lo, hi] including the ends.
inline std::vector<double> split_points(double lo, double hi, std::vector<double> cuts) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::vector<double> out;
  for (double c : cuts)
    if (c >= lo && c <= hi && std::isfinite(c)) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) <= 1e-15 * (1.0 + std::abs(a)); }),
            out.end());
  return out;
}

}  // namespace detail

/// Integral over R^d of the radial function F(|u|), piecewise smooth between the
/// given breakpoints and zero beyond `support`.
template <class F>
double radial_integral(F&& f, std::span<const double> breakpoints, double support, int dim) {
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  const auto pts = detail::split_points(0.0, support, cuts);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += detail::gk_integrate(
        [&](double r) { return detail::surface_factor(dim, r) * f(r); }, pts[i], pts[i + 1]);
  return total;
}

namespace detail {

// Integrates F(sqrt(fixed_sq + sum_{k>=axis} u_k^2)) over the remaining box axes.
template <class F>
double box_radial(const F& f, std::span<const double> radii, const std::array<double, 3>& lo,
                  const std::array<double, 3>& hi, int axis, int dim, double fixed_sq) {
  if (axis == dim) return f(std::sqrt(fixed_sq));
  std::vector<double> cuts{0.0};
  // Remaining-axis squared edge offsets: every combination of {0, lo^2, hi^2}.
  std::vector<double> edge_sums{0.0};
  for (int k = axis + 1; k < dim; ++k) {
    std::vector<double> next;
    for (double s : edge_sums) {
      next.push_back(s);
      next.push_back(s + lo[k] * lo[k]);
      next.push_back(s + hi[k] * hi[k]);
    }
    edge_sums = std::move(next);
  }
  for (double r : radii) {
    const double rho2 = r * r - fixed_sq;
    if (rho2 <= 0.0) continue;
    for (double s : edge_sums) {
      if (rho2 - s > 0.0) {
        const double c = std::sqrt(rho2 - s);
        cuts.push_back(c);
        cuts.push_back(-c);
      }
    }
  }
  const auto pts = split_points(lo[axis], hi[axis], cuts);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += gk_integrate(
        [&](double u) { return box_radial(f, radii, lo, hi, axis + 1, dim, fixed_sq + u * u); }, pts[i],
        pts[i + 1], 1e-11);
  return total;
}

}  // namespace detail

/// Integral of F(|u|) over the axis-aligned box [lo, hi] in R^d. F may jump at `radii`.
template <class F>
double box_integral(F&& f, std::span<const double> radii, const std::array<double, 3>& lo,
                    const std::array<double, 3>& hi, int dim) {
  return detail::box_radial(f, radii, lo, hi, 0, dim, 0.0);
}

class Potential {
 public:
  Potential() : Potential(ZeroProfile{}) {}

  explicit Potential(Profile profile) : profile_(std::move(profile)) {
    validate();
    for (int d = 1; d <= kMaxDim; ++d) functionals_[static_cast<std::size_t>(d - 1)] = compute(d);
  }

  static Potential zero() { return Potential(ZeroProfile{}); }
  static Potential step(double height, double range) { return Potential(StepProfile{height, range}); }
  static Potential exponential(double amplitude, double decay, double range) {
    return Potential(ExponentialProfile{amplitude, decay, range});
  }
  static Potential table(std::vector<double> radii, std::vector<double> values) {
    return Potential(TableProfile{std::move(radii), std::move(values)});
  }

  const Profile& profile() const noexcept { return profile_; }

  double operator()(double r) const {
    if (!(r >= 0.0)) throw InputError("potential evaluated at a negative or NaN radius");
    return value(r);
  }

  /// Unchecked evaluation for hot loops (r >= 0 guaranteed by the caller).
  double value(double r) const noexcept {
    return std::visit(
        [r](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ZeroProfile>) {
            return 0.0;
          } else if constexpr (std::is_same_v<T, StepProfile>) {
            return r <= p.range ? p.height : 0.0;
          } else if constexpr (std::is_same_v<T, ExponentialProfile>) {
            return r <= p.range ? p.amplitude * std::exp(-p.decay * r) : 0.0;
          } else {
            if (r > p.radii.back()) return 0.0;
            if (r <= p.radii.front()) return p.values.front();
            const auto it = std::upper_bound(p.radii.begin(), p.radii.end(), r);
            const auto i = static_cast<std::size_t>(it - p.radii.begin());
            const double w = (r - p.radii[i - 1]) / (p.radii[i] - p.radii[i - 1]);
            return (1.0 - w) * p.values[i - 1] + w * p.values[i];
          }
        },
        profile_);
  }

  double cutoff() const noexcept {
    return std::visit(
        [](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ZeroProfile>) return 0.0;
          else if constexpr (std::is_same_v<T, TableProfile>) return p.radii.back();
          else return p.range;
        },
        profile_);
  }

  bool is_zero() const noexcept { return functionals_[0].linf == 0.0; }

  /// Radii where the profile is not smooth.
  std::vector<double> breakpoints() const {
    return std::visit(
        [](const auto& p) -> std::vector<double> {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ZeroProfile>) return {};
          else if constexpr (std::is_same_v<T, TableProfile>) return p.radii;
          else return {p.range};
        },
        profile_);
  }

  const PotentialFunctionals& functionals(int dim) const {
    if (dim < 1 || dim > kMaxDim) throw InputError("dimension must be 1, 2 or 3");
    return functionals_[static_cast<std::size_t>(dim - 1)];
  }

  double sup() const noexcept { return functionals_[0].linf; }
  double l1(int dim) const { return functionals(dim).l1; }
  double beta(int dim) const { return functionals(dim).beta; }
  double beta_neg(int dim) const { return functionals(dim).beta_neg; }

  std::string describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, ZeroProfile>) os << "zero";
          else if constexpr (std::is_same_v<T, StepProfile>) os << "step(h=" << p.height << ", r0=" << p.range << ")";
          else if constexpr (std::is_same_v<T, ExponentialProfile>)
            os << "exponential(A=" << p.amplitude << ", alpha=" << p.decay << ", r0=" << p.range << ")";
          else os << "table(" << p.radii.size() << " knots, r0=" << p.radii.back() << ")";
        },
        profile_);
    return os.str();
  }

 private:
  void validate() const {
    auto bad = [](const std::string& m) { throw InputError("potential: " + m); };
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, StepProfile>) {
            if (!(p.height >= 0.0) || !std::isfinite(p.height)) bad("step height must be finite and >= 0");
            if (!(p.range > 0.0) || !std::isfinite(p.range)) bad("step range must be positive");
          } else if constexpr (std::is_same_v<T, ExponentialProfile>) {
            if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude)) bad("amplitude must be finite and >= 0");
            if (!(p.decay >= 0.0) || !std::isfinite(p.decay)) bad("decay must be finite and >= 0");
            if (!(p.range > 0.0) || !std::isfinite(p.range)) bad("cutoff must be positive");
          } else if constexpr (std::is_same_v<T, TableProfile>) {
            if (p.radii.empty() || p.radii.size() != p.values.size()) bad("table needs matching non-empty radii/values");
            for (std::size_t i = 0; i < p.radii.size(); ++i) {
              if (!(p.radii[i] > 0.0) || !std::isfinite(p.radii[i])) bad("table radii must be positive");
              if (i > 0 && !(p.radii[i] > p.radii[i - 1])) bad("table radii must be strictly increasing");
              if (!(p.values[i] >= 0.0) || !std::isfinite(p.values[i])) bad("table values must be finite and >= 0");
            }
          }
        },
        profile_);
  }

  PotentialFunctionals compute(int dim) const {
    PotentialFunctionals out;
    const double r0 = cutoff();
    const auto bps = breakpoints();
    double linf = 0.0;
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, StepProfile>) linf = p.height;
          else if constexpr (std::is_same_v<T, ExponentialProfile>) linf = p.amplitude;
          else if constexpr (std::is_same_v<T, TableProfile>)
            linf = *std::max_element(p.values.begin(), p.values.end());
        },
        profile_);
    out.linf = linf;
    if (linf == 0.0 || r0 == 0.0) return out;
    out.l1 = radial_integral([this](double r) { return value(r); }, bps, r0, dim);
    out.beta = radial_integral([this](double r) { return -std::expm1(-value(r)); }, bps, r0, dim);
    if (linf > 700.0) {
      out.beta_neg = std::numeric_limits<double>::infinity();
    } else {
      out.beta_neg = radial_integral([this](double r) { return std::expm1(value(r)); }, bps, r0, dim);
      if (!std::isfinite(out.beta_neg)) out.beta_neg = std::numeric_limits<double>::infinity();
    }
    return out;
  }

  Profile profile_;
  std::array<PotentialFunctionals, kMaxDim> functionals_{};
};

inline double potential_eval(const Potential& pot, double r) { return pot(r); }

/// int_{R^d} |e^{-f} - 1| (plus) or |e^{f} - 1| (minus); +inf when the latter overflows.
inline double beta_integral(const Potential& pot, BetaSign sign, int dim) {
  const auto& f = pot.functionals(dim);
  return sign == BetaSign::plus ? f.beta : f.beta_neg;
}

/// Sum of pot(|x - y|) over y in cfg, minimal-image distances.
inline double relative_energy(const Point& x, std::span<const Point> cfg, const Potential& pot,
                              const Torus& t) {
  t.check_dim(x);
  if (pot.is_zero()) return 0.0;
  const double r0 = pot.cutoff();
  double e = 0.0;
  for (const auto& y : cfg) {
    const double r = torus_distance(x, y, t);
    if (r <= r0) e += pot.value(r);
  }
  return e;
}

inline double relative_energy(const Point& x, const FiniteConfiguration& cfg, const Potential& pot,
                              const Torus& t) {
  return relative_energy(x, cfg.points(), pot, t);
}

/// Same, skipping storage index `skip` (the particle at x itself).
inline double relative_energy_excluding(const Point& x, const FiniteConfiguration& cfg, std::size_t skip,
                                        const Potential& pot, const Torus& t) {
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

/// Throws unless the potential's cutoff fits the torus (r0 <= L/2).
inline void check_cutoff(const Potential& pot, const Torus& t, const std::string& name) {
  if (pot.cutoff() > 0.5 * t.side() * (1.0 + 1e-12))
    throw InputError(name + ": cutoff " + std::to_string(pot.cutoff()) + " exceeds half the torus side");
}

}  // namespace sbd
