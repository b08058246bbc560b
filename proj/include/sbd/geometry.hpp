#pragma once

// Periodic box, finite point configurations and the subset calculus on them
// (K-transform, its Moebius inverse, truncated Lebesgue-Poisson integrals).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "sbd/errors.hpp"
#include "sbd/random.hpp"

namespace sbd {

inline constexpr int kMaxDim = 3;
inline constexpr std::size_t kSubsetEnumerationCap = 20;
inline constexpr int kLebesguePoissonOrderCap = 6;

struct Point {
  std::array<double, kMaxDim> coords{};
  int dim = 1;

  Point() = default;
  Point(std::initializer_list<double> values) : dim(static_cast<int>(values.size())) {
    if (dim < 1 || dim > kMaxDim) throw InputError("Point: dimension must be 1, 2 or 3");
    std::copy(values.begin(), values.end(), coords.begin());
  }

  double operator[](int axis) const { return coords[static_cast<std::size_t>(axis)]; }
  double& operator[](int axis) { return coords[static_cast<std::size_t>(axis)]; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }
};

class Torus {
 public:
  Torus(int dim, double side) : dim_(dim), side_(side) {
    if (dim < 1 || dim > kMaxDim) throw InputError("Torus: dimension must be 1, 2 or 3");
    if (!(side > 0.0) || !std::isfinite(side)) throw InputError("Torus: side must be positive");
  }

  int dim() const noexcept { return dim_; }
  double side() const noexcept { return side_; }
  double volume() const noexcept { return std::pow(side_, dim_); }

  double wrap(double c) const noexcept {
    double w = std::fmod(c, side_);
    if (w < 0.0) w += side_;
    // fmod of a tiny negative number can round up to exactly side_.
    if (w >= side_) w = 0.0;
    return w;
  }

  /// Maps arbitrary coordinates into [0, L)^d.
  Point wrap(Point p) const {
    check_dim(p);
    for (int i = 0; i < dim_; ++i) p[i] = wrap(p[i]);
    return p;
  }

  bool contains(const Point& p) const noexcept {
    if (p.dim != dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (!(p[i] >= 0.0 && p[i] < side_)) return false;
    return true;
  }

  void check_dim(const Point& p) const {
    if (p.dim != dim_)
      throw InputError("dimension mismatch: point has d=" + std::to_string(p.dim) +
                       ", torus has d=" + std::to_string(dim_));
  }

  /// Minimal-image displacement q - p, each component in [-L/2, L/2].
  Point displacement(const Point& p, const Point& q) const {
    check_dim(p);
    check_dim(q);
    Point d = p;
    for (int i = 0; i < dim_; ++i) {
      double delta = q[i] - p[i];
      delta -= side_ * std::round(delta / side_);
      d[i] = delta;
    }
    return d;
  }

  Point uniform_point(CounterRng& rng) const {
    Point p;
    p.dim = dim_;
    for (int i = 0; i < dim_; ++i) p[i] = wrap(rng.uniform() * side_);
    return p;
  }

  friend bool operator==(const Torus&, const Torus&) = default;

 private:
  int dim_;
  double side_;
};

/// Minimal-image Euclidean distance.
inline double torus_distance(const Point& p, const Point& q, const Torus& t) {
  const Point d = t.displacement(p, q);
  double s = 0.0;
  for (int i = 0; i < t.dim(); ++i) s += d[i] * d[i];
  return std::sqrt(s);
}

/// Finite set of distinct points. Storage order carries no meaning.
class FiniteConfiguration {
 public:
  FiniteConfiguration() = default;

  explicit FiniteConfiguration(std::vector<Point> points) : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].dim != points_.front().dim)
        throw InputError("FiniteConfiguration: mixed point dimensions");
      for (std::size_t j = 0; j < i; ++j)
        if (points_[i] == points_[j]) throw InputError("FiniteConfiguration: coincident points");
    }
  }

  FiniteConfiguration(std::vector<Point> points, const Torus& t)
      : FiniteConfiguration(std::move(points)) {
    for (const auto& p : points_) {
      t.check_dim(p);
      if (!t.contains(p)) throw InputError("FiniteConfiguration: point outside the torus");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Point> points() const noexcept { return points_; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  /// Adds a point; rejects exact duplicates.
  void insert(const Point& p) {
    if (!points_.empty() && p.dim != points_.front().dim)
      throw InputError("FiniteConfiguration: dimension mismatch on insert");
    for (const auto& q : points_)
      if (q == p) throw InputError("FiniteConfiguration: coincident points");
    points_.push_back(p);
  }

  /// Removes the point at storage index i (swap with last).
  void erase(std::size_t i) {
    if (i >= points_.size()) throw InputError("FiniteConfiguration: index out of range");
    points_[i] = points_.back();
    points_.pop_back();
  }

  FiniteConfiguration without(std::size_t i) const {
    FiniteConfiguration c = *this;
    c.erase(i);
    return c;
  }

 private:
  std::vector<Point> points_;
};

/// Two-component configuration: system (plus) and environment (minus).
struct MarkedConfiguration {
  FiniteConfiguration plus;
  FiniteConfiguration minus;

  std::size_t size() const noexcept { return plus.size() + minus.size(); }
};

namespace detail {

inline void check_enumerable(std::size_t n) {
  if (n > kSubsetEnumerationCap)
    throw SizeError("subset enumeration limited to " + std::to_string(kSubsetEnumerationCap) +
                    " points, got " + std::to_string(n));
}

template <class Fn>
void for_each_subset(std::span<const Point> eta, Fn&& fn) {
  check_enumerable(eta.size());
  const std::size_t n = eta.size();
  std::vector<Point> subset;
  subset.reserve(n);
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) subset.push_back(eta[i]);
    fn(std::span<const Point>(subset), n - subset.size());
  }
}

}  // namespace detail

/// Sum of f over all 2^|eta| subsets of eta, the empty set included.
template <class F>
double subsets_sum(std::span<const Point> eta, F&& f) {
  double total = 0.0;
  detail::for_each_subset(eta, [&](std::span<const Point> xi, std::size_t) { total += f(xi); });
  return total;
}

template <class F>
double subsets_sum(const FiniteConfiguration& eta, F&& f) {
  return subsets_sum(eta.points(), std::forward<F>(f));
}

/// Sum over component-wise subsets (xi+, xi-) of a marked configuration.
template <class F>
double subsets_sum(const MarkedConfiguration& eta, F&& f) {
  detail::check_enumerable(eta.size());
  double total = 0.0;
  detail::for_each_subset(eta.plus.points(), [&](std::span<const Point> xp, std::size_t) {
    detail::for_each_subset(eta.minus.points(),
                            [&](std::span<const Point> xm, std::size_t) { total += f(xp, xm); });
  });
  return total;
}

/// (K G)(eta) restricted to a finite configuration.
template <class G>
double k_transform(G&& g, std::span<const Point> eta) {
  return subsets_sum(eta, std::forward<G>(g));
}

/// Moebius inverse of the K-transform: sum over xi of (-1)^{|eta \ xi|} F(xi).
template <class F>
double k_inverse(F&& f, std::span<const Point> eta) {
  double total = 0.0;
  detail::for_each_subset(eta, [&](std::span<const Point> xi, std::size_t removed) {
    const double v = f(xi);
    total += (removed % 2 == 0) ? v : -v;
  });
  return total;
}

template <class F>
double k_inverse(F&& f, const FiniteConfiguration& eta) {
  return k_inverse(std::forward<F>(f), eta.points());
}

/// Ball restricting Monte Carlo sampling; the integrand must vanish whenever a
/// point falls outside it.
struct SamplingBall {
  Point center;
  double radius = 0.0;
};

struct MonteCarloQuadrature {
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::optional<SamplingBall> support;
};

/// Midpoint rule with points_per_axis cells along each axis of the torus.
struct GridQuadrature {
  int points_per_axis = 16;
};

using Quadrature = std::variant<MonteCarloQuadrature, GridQuadrature>;

struct IntegralEstimate {
  double value = 0.0;
  double std_error = 0.0;
  /// Contribution of each order n = 0..N.
  std::vector<double> by_order;
};

inline double ball_volume(int dim, double r) {
  switch (dim) {
    case 1: return 2.0 * r;
    case 2: return M_PI * r * r;
    case 3: return 4.0 / 3.0 * M_PI * r * r * r;
    default: throw InputError("ball_volume: dimension must be 1, 2 or 3");
  }
}

/// Uniform point in the d-ball of radius r centred at the origin (as a displacement).
inline Point uniform_in_ball(int dim, double r, CounterRng& rng) {
  Point u;
  u.dim = dim;
  if (dim == 1) {
    u[0] = rng.uniform(-r, r);
    return u;
  }
  // Rejection from the enclosing cube; acceptance pi/4 (d=2) or pi/6 (d=3).
  for (;;) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      u[i] = rng.uniform(-r, r);
      s += u[i] * u[i];
    }
    if (s <= r * r) return u;
  }
}

namespace detail {

inline double inverse_factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return 1.0 / f;
}

template <class G>
double checked_eval(G& g, std::span<const Point> pts) {
  const double v = g(pts);
  if (!std::isfinite(v)) throw EvaluationError("lp_integral: integrand returned a non-finite value");
  return v;
}

}  // namespace detail

/// Truncated Lebesgue-Poisson integral
///   sum_{n=0}^{N} 1/n! * int_{Lambda^n} G({x_1..x_n}) dx
/// over the torus Lambda. Grid quadrature is exact up to the midpoint rule; Monte Carlo
/// reports a standard error per order, combined in quadrature.
template <class G>
IntegralEstimate lp_integral(G&& g, int order_cap, const Torus& t, const Quadrature& quadrature) {
  if (order_cap < 0 || order_cap > kLebesguePoissonOrderCap)
    throw SizeError("lp_integral: order cap must lie in [0, " +
                    std::to_string(kLebesguePoissonOrderCap) + "]");
  IntegralEstimate out;
  out.by_order.assign(static_cast<std::size_t>(order_cap) + 1, 0.0);
  std::vector<Point> pts;

  out.by_order[0] = detail::checked_eval(g, std::span<const Point>(pts));
  double variance = 0.0;

  if (const auto* grid = std::get_if<GridQuadrature>(&quadrature)) {
    const int m = grid->points_per_axis;
    if (m < 1) throw InputError("lp_integral: points_per_axis must be positive");
    const double h = t.side() / m;
    const std::uint64_t cells = static_cast<std::uint64_t>(std::llround(std::pow(m, t.dim())));
    std::vector<Point> centers(cells);
    for (std::uint64_t c = 0; c < cells; ++c) {
      Point p;
      p.dim = t.dim();
      std::uint64_t rest = c;
      for (int a = 0; a < t.dim(); ++a) {
        p[a] = (static_cast<double>(rest % static_cast<std::uint64_t>(m)) + 0.5) * h;
        rest /= static_cast<std::uint64_t>(m);
      }
      centers[c] = p;
    }
    const double cell_volume = std::pow(h, t.dim());
    for (int n = 1; n <= order_cap; ++n) {
      const double tuples = std::pow(static_cast<double>(cells), n);
      if (tuples > 5e8) throw SizeError("lp_integral: grid too fine for order " + std::to_string(n));
      std::vector<std::uint64_t> idx(static_cast<std::size_t>(n), 0);
      pts.assign(static_cast<std::size_t>(n), centers[0]);
      double sum = 0.0;
      for (;;) {
        for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = centers[idx[static_cast<std::size_t>(i)]];
        sum += detail::checked_eval(g, std::span<const Point>(pts));
        int k = 0;
        while (k < n && ++idx[static_cast<std::size_t>(k)] == cells) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == n) break;
      }
      out.by_order[static_cast<std::size_t>(n)] =
          sum * std::pow(cell_volume, n) * detail::inverse_factorial(n);
    }
  } else {
    const auto& mc = std::get<MonteCarloQuadrature>(quadrature);
    if (mc.samples < 2) throw InputError("lp_integral: Monte Carlo needs at least 2 samples");
    CounterRng rng(mc.seed, mc.stream);
    const double region = mc.support ? ball_volume(t.dim(), mc.support->radius) : t.volume();
    for (int n = 1; n <= order_cap; ++n) {
      pts.assign(static_cast<std::size_t>(n), Point{});
      double mean = 0.0, m2 = 0.0;
      for (std::size_t s = 0; s < mc.samples; ++s) {
        for (auto& p : pts) {
          if (mc.support) {
            Point u = uniform_in_ball(t.dim(), mc.support->radius, rng);
            for (int a = 0; a < t.dim(); ++a) u[a] += mc.support->center[a];
            p = t.wrap(u);
          } else {
            p = t.uniform_point(rng);
          }
        }
        const double v = detail::checked_eval(g, std::span<const Point>(pts));
        const double delta = v - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (v - mean);
      }
      const double scale = std::pow(region, n) * detail::inverse_factorial(n);
      const double var_mean = m2 / static_cast<double>(mc.samples - 1) / static_cast<double>(mc.samples);
      out.by_order[static_cast<std::size_t>(n)] = scale * mean;
      variance += scale * scale * var_mean;
    }
  }
  for (double v : out.by_order) out.value += v;
  out.std_error = std::sqrt(variance);
  return out;
}

}  // namespace sbd
