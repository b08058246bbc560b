#pragma once

// Truncated correlation functions of the environment on a periodic grid: the
// correlation-function generator, its stationary (Kirkwood-Salsburg) fixed point,
// explicit time evolution, and functionals of the stationary state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbd/errors.hpp"
#include "sbd/geometry.hpp"
#include "sbd/models.hpp"
#include "sbd/potentials.hpp"
#include "sbd/random.hpp"
#include "sbd/regime.hpp"

namespace sbd {

inline constexpr int kDefaultOrder = 3;

/// Regular grid with nodes at multiples of h = L / points_per_axis.
class GridSpec {
 public:
  GridSpec(int points_per_axis, const Torus& t) : ppa_(points_per_axis), torus_(t) {
    if (ppa_ < 4) throw InputError("grid: points_per_axis must be >= 4");
    cells_ = 1;
    for (int i = 0; i < t.dim(); ++i) cells_ *= static_cast<std::size_t>(ppa_);
  }

  int points_per_axis() const noexcept { return ppa_; }
  const Torus& torus() const noexcept { return torus_; }
  int dim() const noexcept { return torus_.dim(); }
  double spacing() const noexcept { return torus_.side() / ppa_; }
  double cell_volume() const noexcept { return std::pow(spacing(), dim()); }
  std::size_t cells() const noexcept { return cells_; }

  std::array<int, 3> coords(std::size_t cell) const noexcept {
    std::array<int, 3> c{};
    for (int a = 0; a < dim(); ++a) {
      c[static_cast<std::size_t>(a)] = static_cast<int>(cell % static_cast<std::size_t>(ppa_));
      cell /= static_cast<std::size_t>(ppa_);
    }
    return c;
  }

  std::size_t index(std::array<int, 3> c) const noexcept {
    std::size_t idx = 0;
    for (int a = dim() - 1; a >= 0; --a) {
      int v = c[static_cast<std::size_t>(a)] % ppa_;
      if (v < 0) v += ppa_;
      idx = idx * static_cast<std::size_t>(ppa_) + static_cast<std::size_t>(v);
    }
    return idx;
  }

  std::size_t add(std::size_t a, std::size_t b) const noexcept {
    auto ca = coords(a), cb = coords(b);
    for (int i = 0; i < dim(); ++i) ca[static_cast<std::size_t>(i)] += cb[static_cast<std::size_t>(i)];
    return index(ca);
  }

  /// Cell index of b - a (periodic).
  std::size_t diff(std::size_t a, std::size_t b) const noexcept {
    auto ca = coords(a), cb = coords(b);
    for (int i = 0; i < dim(); ++i) cb[static_cast<std::size_t>(i)] -= ca[static_cast<std::size_t>(i)];
    return index(cb);
  }

  Point node(std::size_t cell) const {
    const auto c = coords(cell);
    Point p;
    p.dim = dim();
    for (int a = 0; a < dim(); ++a) p[a] = c[static_cast<std::size_t>(a)] * spacing();
    return p;
  }

  /// Minimal-image length of the displacement represented by a cell index.
  double offset_length(std::size_t cell) const noexcept {
    const auto c = coords(cell);
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) {
      int v = c[static_cast<std::size_t>(a)];
      if (v > ppa_ / 2) v -= ppa_;
      const double u = v * spacing();
      s += u * u;
    }
    return std::sqrt(s);
  }

  void check_resolution(const Potential& pot, const std::string& name) const {
    if (pot.is_zero()) return;
    check_cutoff(pot, torus_, name);
    if (spacing() > 0.5 * pot.cutoff() * (1.0 + 1e-12))
      throw InputError("grid spacing " + std::to_string(spacing()) + " exceeds half the cutoff of " + name +
                       "; increase points_per_axis");
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.ppa_ == b.ppa_ && a.torus_ == b.torus_;
  }

 private:
  int ppa_;
  Torus torus_;
  std::size_t cells_ = 1;
};

/// Correlation function {k_n}_{n<=N} on the grid, translation reduced: an order-n entry
/// is indexed by the n-1 offsets of points 2..n relative to point 1.
class CorrelationTable {
 public:
  CorrelationTable(const GridSpec& grid, int max_order, double ruelle_c)
      : grid_(grid), max_order_(max_order), ruelle_c_(ruelle_c) {
    if (max_order < 0 || max_order > 4) throw InputError("correlation table: order must lie in [0, 4]");
    if (!(ruelle_c > 0.0)) throw InputError("correlation table: Ruelle weight must be positive");
    offsets_.push_back(0);
    std::size_t total = 0;
    for (int n = 0; n <= max_order; ++n) {
      total += order_size(n);
      offsets_.push_back(total);
    }
    data_.assign(total, 0.0);
  }

  /// k(eta) = z^{|eta|}: the Poisson correlation function.
  static CorrelationTable poisson(const GridSpec& grid, int max_order, double z, double ruelle_c) {
    CorrelationTable k(grid, max_order, ruelle_c);
    for (int n = 0; n <= max_order; ++n) {
      auto o = k.order(n);
      std::fill(o.begin(), o.end(), std::pow(z, n));
    }
    return k;
  }

  const GridSpec& grid() const noexcept { return grid_; }
  int max_order() const noexcept { return max_order_; }
  double ruelle_c() const noexcept { return ruelle_c_; }
  void set_ruelle_c(double c) {
    if (!(c > 0.0)) throw InputError("correlation table: Ruelle weight must be positive");
    ruelle_c_ = c;
  }

  std::size_t order_size(int n) const noexcept {
    std::size_t s = 1;
    for (int j = 1; j < n; ++j) s *= grid_.cells();
    return s;
  }

  std::span<double> order(int n) {
    return {data_.data() + offsets_[static_cast<std::size_t>(n)], order_size(n)};
  }
  std::span<const double> order(int n) const {
    return {data_.data() + offsets_[static_cast<std::size_t>(n)], order_size(n)};
  }

  double k0() const noexcept { return data_[0]; }
  double density() const noexcept { return max_order_ >= 1 ? data_[1] : 0.0; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// Entry index of absolute cells (size n >= 1, n <= max_order).
  std::size_t entry(std::span<const std::size_t> cells) const noexcept {
    std::size_t e = 0, stride = 1;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      e += grid_.diff(cells[0], cells[j]) * stride;
      stride *= grid_.cells();
    }
    return e;
  }

  /// Value at absolute cells; sizes up to max_order only.
  double at(std::span<const std::size_t> cells) const {
    const int n = static_cast<int>(cells.size());
    if (n > max_order_) throw SizeError("correlation table: order exceeds the truncation");
    if (n == 0) return data_[0];
    return data_[offsets_[static_cast<std::size_t>(n)] + entry(cells)];
  }

  /// Cells of entry e at order n with the first point at cell 0.
  void decode(int n, std::size_t e, std::vector<std::size_t>& cells) const {
    cells.assign(static_cast<std::size_t>(n), 0);
    for (int j = 1; j < n; ++j) {
      cells[static_cast<std::size_t>(j)] = e % grid_.cells();
      e /= grid_.cells();
    }
  }

  bool solved() const noexcept { return solved_; }
  const std::string& solved_for() const noexcept { return solved_for_; }
  void mark_solved(std::string model_name) {
    solved_ = true;
    solved_for_ = std::move(model_name);
  }

  CorrelationTable& axpy(double a, const CorrelationTable& x) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    solved_ = false;
    return *this;
  }

 private:
  GridSpec grid_;
  int max_order_;
  double ruelle_c_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
  bool solved_ = false;
  std::string solved_for_;
};

/// max_n max|k_n| c^{-n}
inline double kc_norm(const CorrelationTable& k, double c) {
  if (!(c > 0.0)) throw InputError("kc_norm: weight must be positive");
  double best = 0.0;
  for (int n = 0; n <= k.max_order(); ++n) {
    double m = 0.0;
    for (double v : k.order(n)) m = std::max(m, std::abs(v));
    best = std::max(best, m * std::pow(c, -n));
  }
  return best;
}

inline double kc_distance(const CorrelationTable& a, const CorrelationTable& b, double c) {
  CorrelationTable d = a;
  d.axpy(-1.0, b);
  return kc_norm(d, c);
}

inline double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// How the (N+1)-point function is replaced inside the truncated integrals.
enum class Closure {
  poisson,  ///< k_{N+1}(x_1..x_{N+1}) = rho k_N(x_1..x_N), rho the table's one-point value
  zero,     ///< k_{N+1} = 0
};

/// Cell-integrated kernel weights over the offsets where the kernel is supported.
struct Stencil {
  std::vector<std::size_t> cells;
  std::vector<double> weights;

  double total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Stencil of f(|u|) integrated over the cell around each grid offset. Offsets that
/// alias to the same periodic cell are merged.
template <class F>
Stencil make_stencil(const GridSpec& grid, F&& f, std::span<const double> breakpoints, double support) {
  Stencil s;
  if (support <= 0.0) return s;
  const double h = grid.spacing();
  const int reach = static_cast<int>(std::ceil(support / h + 0.5));
  const int d = grid.dim();
  std::vector<double> acc(grid.cells(), 0.0);
  std::vector<char> used(grid.cells(), 0);
  std::array<int, 3> o{};
  const int span_len = 2 * reach + 1;
  int total = 1;
  for (int a = 0; a < d; ++a) total *= span_len;
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    std::array<double, 3> lo{}, hi{};
    double nearest2 = 0.0;
    for (int a = 0; a < d; ++a) {
      o[static_cast<std::size_t>(a)] = rest % span_len - reach;
      rest /= span_len;
      lo[static_cast<std::size_t>(a)] = (o[static_cast<std::size_t>(a)] - 0.5) * h;
      hi[static_cast<std::size_t>(a)] = (o[static_cast<std::size_t>(a)] + 0.5) * h;
      const double near = std::max(0.0, std::abs(o[static_cast<std::size_t>(a)] * h) - 0.5 * h);
      nearest2 += near * near;
    }
    if (std::sqrt(nearest2) >= support) continue;
    const double w = box_integral(f, breakpoints, lo, hi, d);
    const std::size_t cell = grid.index(o);
    acc[cell] += w;
    used[cell] = 1;
  }
  for (std::size_t c = 0; c < acc.size(); ++c) {
    if (used[c] && acc[c] != 0.0) {
      s.cells.push_back(c);
      s.weights.push_back(acc[c]);
    }
  }
  return s;
}

inline Stencil pair_stencil(const GridSpec& grid, const Potential& pot) {
  if (pot.is_zero()) return {};
  const auto bps = pot.breakpoints();
  return make_stencil(grid, [&pot](double r) { return pot.value(r); }, bps, pot.cutoff());
}

/// Cell integrals of e^{-f} - 1 (negative weights).
inline Stencil mayer_stencil(const GridSpec& grid, const Potential& pot) {
  if (pot.is_zero()) return {};
  const auto bps = pot.breakpoints();
  return make_stencil(grid, [&pot](double r) { return std::expm1(-pot.value(r)); }, bps, pot.cutoff());
}

namespace detail {

inline double inv_factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return 1.0 / f;
}

/// Grid form of one KernelForm: pointwise values at grid offsets and stencils.
struct GridKernel {
  double constant = 0.0;
  std::vector<double> pair_at;  ///< pair(|offset|) per cell, empty when absent
  Stencil pair;
  double amplitude = 0.0;
  bool has_product = false;
  std::vector<double> product_at;  ///< product potential per cell
  Stencil mayer;

  GridKernel(const KernelForm& form, const GridSpec& grid) : constant(form.constant), amplitude(form.product_amplitude) {
    if (form.pair && !form.pair->is_zero()) {
      pair_at.resize(grid.cells());
      for (std::size_t c = 0; c < grid.cells(); ++c) pair_at[c] = form.pair->value(grid.offset_length(c));
      pair = pair_stencil(grid, *form.pair);
    }
    if (amplitude != 0.0 && form.product && !form.product->is_zero()) {
      has_product = true;
      product_at.resize(grid.cells());
      for (std::size_t c = 0; c < grid.cells(); ++c) product_at[c] = form.product->value(grid.offset_length(c));
      mayer = mayer_stencil(grid, *form.product);
    }
  }
};

}  // namespace detail

/// The environment's correlation-function generator on a grid, with stencils built once.
class EnvironmentHierarchy {
 public:
  EnvironmentHierarchy(const RateModel& m, const GridSpec& grid, Closure closure = Closure::poisson)
      : grid_(grid), closure_(closure), death_(environment_kernels(m).death, grid),
        birth_(environment_kernels(m).birth, grid) {
    const EnvironmentKernels forms = environment_kernels(m);
    for (const auto* k : {&forms.death, &forms.birth}) {
      if (k->pair) grid.check_resolution(*k->pair, "environment pair kernel");
      if (k->product && k->product_amplitude != 0.0) grid.check_resolution(*k->product, "environment potential");
    }
  }

  const GridSpec& grid() const noexcept { return grid_; }
  Closure closure() const noexcept { return closure_; }

  /// d(x, rest) and b(x, rest) at grid nodes.
  std::pair<double, double> rates_at(std::size_t x, std::span<const std::size_t> rest) const {
    return {rate(death_, x, rest), rate(birth_, x, rest)};
  }

  /// M(eta) = sum_{x in eta} d(x, eta \ x).
  double total_death(std::span<const std::size_t> eta) const {
    double m = 0.0;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      rest.clear();
      for (std::size_t j = 0; j < eta.size(); ++j)
        if (j != i) rest.push_back(eta[j]);
      m += rate(death_, eta[i], rest);
    }
    return m;
  }

  /// (L k)(eta) for every stored entry; the order-0 slot is 0.
  CorrelationTable apply(const CorrelationTable& k) const {
    check_table(k);
    CorrelationTable out(k.grid(), k.max_order(), k.ruelle_c());
    const double rho = closure_ == Closure::poisson ? k.density() : 0.0;
    std::vector<std::size_t> eta, rest, buf;
    for (int n = 1; n <= k.max_order(); ++n) {
      auto dst = out.order(n);
      for (std::size_t e = 0; e < dst.size(); ++e) {
        k.decode(n, e, eta);
        dst[e] = apply_at(k, rho, eta, rest, buf);
      }
    }
    return out;
  }

  /// Maximum of M over the stored configurations of order <= N.
  double max_total_death(int max_order) const {
    double worst = 0.0;
    CorrelationTable probe(grid_, max_order, 1.0);
    std::vector<std::size_t> eta;
    for (int n = 1; n <= max_order; ++n) {
      for (std::size_t e = 0; e < probe.order_size(n); ++e) {
        probe.decode(n, e, eta);
        worst = std::max(worst, total_death(eta));
      }
    }
    return worst;
  }

  /// Per-entry M(eta) for orders 1..N (order 0 slot unused).
  CorrelationTable total_death_table(int max_order, double ruelle_c) const {
    CorrelationTable m(grid_, max_order, ruelle_c);
    std::vector<std::size_t> eta;
    for (int n = 1; n <= max_order; ++n) {
      auto dst = m.order(n);
      for (std::size_t e = 0; e < dst.size(); ++e) {
        m.decode(n, e, eta);
        dst[e] = total_death(eta);
      }
    }
    return m;
  }

 private:
  void check_table(const CorrelationTable& k) const {
    if (!(k.grid() == grid_)) throw InputError("correlation table grid does not match the operator grid");
  }

  double rate(const detail::GridKernel& g, std::size_t x, std::span<const std::size_t> rest) const {
    double v = g.constant;
    if (!g.pair_at.empty())
      for (auto y : rest) v += g.pair_at[grid_.diff(x, y)];
    if (g.amplitude != 0.0) {
      if (!g.has_product) {
        v += g.amplitude;
      } else {
        double e = 0.0;
        for (auto y : rest) e += g.product_at[grid_.diff(x, y)];
        v += g.amplitude * std::exp(-e);
      }
    }
    return v;
  }

  static double lookup(const CorrelationTable& k, double rho, std::span<const std::size_t> cells) {
    const int n = static_cast<int>(cells.size());
    if (n <= k.max_order()) return k.at(cells);
    if (n == k.max_order() + 1) return rho == 0.0 ? 0.0 : rho * k.at(cells.first(cells.size() - 1));
    return 0.0;
  }

  // Sum over ordered m-tuples from the stencil around x of prod(weights) k(base + tuple).
  double tuple_sum(const CorrelationTable& k, double rho, std::vector<std::size_t>& buf, std::size_t x,
                   const Stencil& s, int m) const {
    if (m == 0) return lookup(k, rho, buf);
    double total = 0.0;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
      buf.push_back(grid_.add(x, s.cells[i]));
      total += s.weights[i] * tuple_sum(k, rho, buf, x, s, m - 1);
      buf.pop_back();
    }
    return total;
  }

  // int k(base u xi) sum_{zeta subset rest} K(x, zeta u xi) dlambda(xi), xi != empty,
  // truncated where |base| + |xi| exceeds N + 1.
  double xi_integral(const detail::GridKernel& g, const CorrelationTable& k, double rho,
                     std::span<const std::size_t> base, std::size_t x, std::span<const std::size_t> rest,
                     std::vector<std::size_t>& buf) const {
    const int limit = k.max_order() + 1 - static_cast<int>(base.size());
    if (limit < 1) return 0.0;
    buf.assign(base.begin(), base.end());
    double total = 0.0;
    if (!g.pair.cells.empty()) total += tuple_sum(k, rho, buf, x, g.pair, 1);
    if (g.has_product) {
      double e = 0.0;
      for (auto y : rest) e += g.product_at[grid_.diff(x, y)];
      const double pref = g.amplitude * std::exp(-e);
      for (int m = 1; m <= limit; ++m) total += pref * detail::inv_factorial(m) * tuple_sum(k, rho, buf, x, g.mayer, m);
    }
    return total;
  }

  double apply_at(const CorrelationTable& k, double rho, std::span<const std::size_t> eta,
                  std::vector<std::size_t>& rest, std::vector<std::size_t>& buf) const {
    double out = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      const std::size_t x = eta[i];
      rest.clear();
      for (std::size_t j = 0; j < eta.size(); ++j)
        if (j != i) rest.push_back(eta[j]);
      const double d = rate(death_, x, rest);
      const double b = rate(birth_, x, rest);
      const double death_part = d * lookup(k, rho, eta) + xi_integral(death_, k, rho, eta, x, rest, buf);
      const double birth_part = b * lookup(k, rho, rest) + xi_integral(birth_, k, rho, rest, x, rest, buf);
      out += birth_part - death_part;
    }
    return out;
  }

  GridSpec grid_;
  Closure closure_;
  detail::GridKernel death_;
  detail::GridKernel birth_;
};

/// Correlation-function generator applied to k (closure density = k's own one-point value).
inline CorrelationTable l_delta_apply(const CorrelationTable& k, const RateModel& m,
                                      Closure closure = Closure::poisson) {
  return EnvironmentHierarchy(m, k.grid(), closure).apply(k);
}

namespace detail {

// S k~ = (L k~ + M k~) / M on nonempty configurations, k~(empty) = 0.
inline CorrelationTable s_operator(const EnvironmentHierarchy& op, const CorrelationTable& death_table,
                                   CorrelationTable kt) {
  kt.data()[0] = 0.0;
  CorrelationTable out = op.apply(kt);
  for (int n = 1; n <= kt.max_order(); ++n) {
    auto o = out.order(n);
    auto src = kt.order(n);
    auto mm = death_table.order(n);
    for (std::size_t e = 0; e < o.size(); ++e) {
      if (!(mm[e] > 0.0)) throw ModelError("total death rate vanishes on a nonempty configuration");
      o[e] = (o[e] + mm[e] * src[e]) / mm[e];
    }
  }
  out.data()[0] = 0.0;
  return out;
}

}  // namespace detail

/// One application of the Kirkwood-Salsburg operator to k~ (order-0 slot ignored).
inline CorrelationTable ks_apply(const CorrelationTable& k, const RateModel& m, const RegimeParams& rp,
                                 Closure closure = Closure::poisson) {
  rp.validate();
  EnvironmentHierarchy op(m, k.grid(), closure);
  auto out = detail::s_operator(op, op.total_death_table(k.max_order(), rp.c_minus), k);
  out.set_ruelle_c(rp.c_minus);
  return out;
}

struct KsResult {
  CorrelationTable k_inv;
  int iterations = 0;
  double residual = 0.0;
  double contraction = 0.0;    ///< largest observed ratio of successive K_C increments
  double forcing_norm = 0.0;   ///< K_C norm of the forcing term
  bool ruelle_consistent = true;
};

struct KsOptions {
  int order = kDefaultOrder;
  double tol = 1e-12;
  int max_iter = 500;
  Closure closure = Closure::poisson;
};

/// Picard iteration k~ <- S k~ + f from k~ = 0; returns k_inv = 1 at the empty set plus k~.
inline KsResult ks_solve(const RateModel& m, const RegimeParams& rp, const GridSpec& grid, const KsOptions& opt = {}) {
  rp.validate();
  if (opt.order < 1) throw InputError("ks_solve: order must be >= 1");
  if (!(opt.tol > 0.0)) throw InputError("ks_solve: tolerance must be positive");
  if (opt.max_iter < 1) throw InputError("ks_solve: max_iter must be >= 1");
  EnvironmentHierarchy op(m, grid, opt.closure);
  const CorrelationTable death_table = op.total_death_table(opt.order, rp.c_minus);

  // Forcing: L applied to the vacuum, divided by M (nonzero only on singletons).
  CorrelationTable vacuum(grid, opt.order, rp.c_minus);
  vacuum.data()[0] = 1.0;
  CorrelationTable forcing = op.apply(vacuum);
  for (int n = 1; n <= opt.order; ++n) {
    auto f = forcing.order(n);
    auto mm = death_table.order(n);
    for (std::size_t e = 0; e < f.size(); ++e) {
      if (!(mm[e] > 0.0)) throw ModelError("total death rate vanishes on a nonempty configuration");
      f[e] /= mm[e];
    }
  }
  forcing.data()[0] = 0.0;

  KsResult res{CorrelationTable(grid, opt.order, rp.c_minus)};
  res.forcing_norm = kc_norm(forcing, rp.c_minus);
  CorrelationTable k(grid, opt.order, rp.c_minus);
  CorrelationTable sk = detail::s_operator(op, death_table, k);
  double prev_step = -1.0;
  double residual = 0.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    CorrelationTable next = sk;
    next.axpy(1.0, forcing);
    const double step = kc_distance(next, k, rp.c_minus);
    if (prev_step > 0.0 && step > 0.0) res.contraction = std::max(res.contraction, step / prev_step);
    prev_step = step;
    CorrelationTable snext = detail::s_operator(op, death_table, next);
    CorrelationTable r = snext;
    r.axpy(1.0, forcing).axpy(-1.0, next);
    residual = sup_norm(r.data());
    k = std::move(next);
    sk = std::move(snext);
    if (!std::isfinite(residual)) break;
    if (residual <= opt.tol) {
      k.data()[0] = 1.0;
      res.iterations = it;
      res.residual = residual;
      CorrelationTable tilde = k;
      tilde.data()[0] = 0.0;
      if (res.contraction < 1.0)
        res.ruelle_consistent =
            kc_norm(tilde, rp.c_minus) <= res.forcing_norm / (1.0 - res.contraction) * (1.0 + 1e-9) + 1e-12;
      k.mark_solved(m.name());
      res.k_inv = std::move(k);
      return res;
    }
  }
  throw ConvergenceError("Kirkwood-Salsburg iteration did not converge within " + std::to_string(opt.max_iter) +
                             " iterations (residual " + std::to_string(residual) +
                             "); the regime is probably outside the contraction region",
                         residual);
}

struct HierarchyTrajectory {
  std::vector<double> times;
  std::vector<CorrelationTable> tables;
  std::vector<double> norms;  ///< K_C distance to the reference, empty without one
};

struct EvolveOptions {
  std::optional<CorrelationTable> reference;
  int record_every = 1;
  Closure closure = Closure::poisson;
};

/// Classical RK4 for dk/dt = L k with fixed step dt (dt <= 0 picks 0.01 / max M).
inline HierarchyTrajectory evolve_hierarchy(const CorrelationTable& k0, const RateModel& m, double horizon, double dt,
                                            const EvolveOptions& opt = {}) {
  if (!(horizon >= 0.0)) throw InputError("evolve_hierarchy: horizon must be >= 0");
  if (k0.k0() != 1.0) throw InputError("evolve_hierarchy: initial table must have k(empty) = 1");
  if (opt.record_every < 1) throw InputError("evolve_hierarchy: record_every must be >= 1");
  EnvironmentHierarchy op(m, k0.grid(), opt.closure);
  const double max_m = op.max_total_death(k0.max_order());
  if (dt <= 0.0) dt = 0.01 / std::max(max_m, 1e-12);
  if (dt * max_m > 0.1 * (1.0 + 1e-12))
    throw InputError("evolve_hierarchy: dt too large for the death-rate scale (need dt <= 0.1 / " +
                     std::to_string(max_m) + ")");
  const double c = k0.ruelle_c();
  const double initial_norm = kc_norm(k0, c);

  HierarchyTrajectory traj;
  auto record = [&](double t, const CorrelationTable& k) {
    traj.times.push_back(t);
    traj.tables.push_back(k);
    if (opt.reference) traj.norms.push_back(kc_distance(k, *opt.reference, c));
  };
  CorrelationTable k = k0;
  record(0.0, k);
  const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  for (long s = 1; s <= steps; ++s) {
    const double h = std::min(dt, horizon - (s - 1) * dt);
    const CorrelationTable k1 = op.apply(k);
    CorrelationTable tmp = k;
    tmp.axpy(0.5 * h, k1);
    const CorrelationTable k2 = op.apply(tmp);
    tmp = k;
    tmp.axpy(0.5 * h, k2);
    const CorrelationTable k3 = op.apply(tmp);
    tmp = k;
    tmp.axpy(h, k3);
    const CorrelationTable k4 = op.apply(tmp);
    k.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
    const double norm = kc_norm(k, c);
    if (!std::isfinite(norm) || norm > 10.0 * initial_norm)
      throw StabilityError("hierarchy integration blew up at t=" + std::to_string(s * dt) +
                           "; reduce the time step");
    if (s % opt.record_every == 0 || s == steps) record(std::min(horizon, s * dt), k);
  }
  return traj;
}

/// Truncated expansion of int e^{-E_f(x, gamma)} dmu(gamma) in the correlation function.
struct ExpFunctional {
  double value = 1.0;
  double tail_bound = 0.0;
  std::vector<double> terms;  ///< order-n contributions
};

inline ExpFunctional exp_functional(const CorrelationTable& k, const Potential& f) {
  ExpFunctional out;
  out.terms.assign(static_cast<std::size_t>(k.max_order()) + 1, 0.0);
  out.terms[0] = k.k0();
  out.value = k.k0();
  if (f.is_zero()) return out;
  const GridSpec& grid = k.grid();
  grid.check_resolution(f, "averaging potential");
  const Stencil s = mayer_stencil(grid, f);
  std::vector<std::size_t> buf;
  // sum over ordered n-tuples of stencil cells around x = cell 0
  std::function<double(int)> rec = [&](int m) -> double {
    if (m == 0) return k.at(buf);
    double total = 0.0;
    for (std::size_t i = 0; i < s.cells.size(); ++i) {
      buf.push_back(s.cells[i]);
      total += s.weights[i] * rec(m - 1);
      buf.pop_back();
    }
    return total;
  };
  for (int n = 1; n <= k.max_order(); ++n) {
    buf.clear();
    out.terms[static_cast<std::size_t>(n)] = detail::inv_factorial(n) * rec(n);
    out.value += out.terms[static_cast<std::size_t>(n)];
  }
  const double c = k.ruelle_c();
  const double cb = c * f.beta(grid.dim());
  double tail = 0.0, term = 1.0;
  for (int n = 1; n <= k.max_order() + 80; ++n) {
    term *= cb / n;
    if (n > k.max_order()) tail += term;
  }
  out.tail_bound = kc_norm(k, c) * tail;
  return out;
}

struct InvariantSummary {
  double rho_inv = 0.0;
  std::optional<ExpFunctional> lambda_bar;  ///< for variants whose system feels e^{-E(x, gamma^-)}
  double kc_norm = 0.0;
};

inline InvariantSummary invariant_summary(const CorrelationTable& k_inv, const RateModel& m) {
  if (k_inv.k0() != 1.0) throw StateError("invariant_summary: table is not normalized (k(empty) != 1)");
  InvariantSummary s;
  s.rho_inv = k_inv.density();
  s.kc_norm = kc_norm(k_inv, k_inv.ruelle_c());
  if (const auto* v = m.get_if<GlauberGlauber>()) s.lambda_bar = exp_functional(k_inv, v->phi_minus);
  else if (const auto* v = m.get_if<BranchingInGlauber>()) s.lambda_bar = exp_functional(k_inv, v->phi);
  return s;
}

struct LenardReport {
  int checks = 0;
  int violations = 0;
  double worst_margin = 0.0;  ///< most negative <G, k> + tolerance seen
  bool normalized = true;
  bool passed = true;
  std::vector<std::string> notes;
};

/// Necessary-condition check: for G = prod g with g >= -1 on grid windows,
/// <G, k> = sum_n 1/n! int prod g k_n must be >= -(tol + truncation tail).
inline LenardReport lenard_spot_check(const CorrelationTable& k, int samples, std::uint64_t seed = 1,
                                      double tol = 1e-9) {
  LenardReport rep;
  if (k.k0() != 1.0) {
    rep.normalized = false;
    rep.passed = false;
    rep.notes.push_back("k(empty) != 1");
    return rep;
  }
  const GridSpec& grid = k.grid();
  CounterRng rng(seed, 0x1e4a);
  const double vol = grid.cell_volume();
  const double c = k.ruelle_c();
  const double knorm = kc_norm(k, c);
  const int ppa = grid.points_per_axis();
  std::vector<std::size_t> cells, buf;
  std::vector<double> g;
  for (int s = 0; s < samples; ++s) {
    // Window of w cells per axis at a random corner; half the samples are holes (g = -1).
    const int w = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(std::max(1, ppa / 2))));
    std::array<int, 3> corner{};
    for (int a = 0; a < grid.dim(); ++a) corner[static_cast<std::size_t>(a)] = static_cast<int>(rng.index(ppa));
    cells.clear();
    g.clear();
    const bool hole = (s % 2 == 0);
    int count = 1;
    for (int a = 0; a < grid.dim(); ++a) count *= w;
    for (int i = 0; i < count; ++i) {
      std::array<int, 3> cc = corner;
      int rest = i;
      for (int a = 0; a < grid.dim(); ++a) {
        cc[static_cast<std::size_t>(a)] += rest % w;
        rest /= w;
      }
      cells.push_back(grid.index(cc));
      g.push_back(hole ? -1.0 : rng.uniform(-1.0, 1.0));
    }
    double l1 = 0.0;
    for (double v : g) l1 += std::abs(v) * vol;
    double value = 1.0;
    for (int n = 1; n <= k.max_order(); ++n) {
      std::function<double(int)> rec = [&](int m) -> double {
        if (m == 0) return k.at(buf);
        double t = 0.0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          buf.push_back(cells[i]);
          t += g[i] * vol * rec(m - 1);
          buf.pop_back();
        }
        return t;
      };
      buf.clear();
      value += detail::inv_factorial(n) * rec(n);
    }
    double tail = 0.0, term = 1.0;
    for (int n = 1; n <= k.max_order() + 80; ++n) {
      term *= c * l1 / n;
      if (n > k.max_order()) tail += term;
    }
    tail *= knorm;
    ++rep.checks;
    const double margin = value + tol + tail;
    rep.worst_margin = rep.checks == 1 ? margin : std::min(rep.worst_margin, margin);
    if (margin < 0.0) {
      ++rep.violations;
      if (rep.notes.size() < 5)
        rep.notes.push_back(std::string(hole ? "hole" : "window") + " observable of " + std::to_string(count) +
                            " cells: <G,k> = " + std::to_string(value) + ", tail " + std::to_string(tail));
    }
  }
  rep.passed = rep.violations == 0;
  return rep;
}

}  // namespace sbd
