#pragma once

// Relaxation-rate fits and the two experiments: density relaxation of the environment,
// and coupled-versus-averaged system densities over a sweep of time-scale ratios.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbd/averaged.hpp"
#include "sbd/conditions.hpp"
#include "sbd/errors.hpp"
#include "sbd/simulator.hpp"

namespace sbd {

struct FitWindow {
  double start = 0.0;
  double end = 0.0;
};

struct FitResult {
  double rate = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  FitWindow window;
  double rate_stderr = 0.0;
  std::size_t points = 0;
};

struct FitOptions {
  double discard_fraction = 0.1;  ///< leading fraction of the time span treated as transient
  double noise_threshold = 0.0;   ///< samples with |y - floor| at or below this end the window
  std::optional<std::vector<double>> sigmas;  ///< per-sample standard errors of y
  std::size_t min_points = 8;
};

/// Weighted least squares of log|y - floor| against t over the first contiguous run of
/// samples above the noise threshold after the transient.
inline FitResult fit_exponential_rate(std::span<const double> times, std::span<const double> values, double floor,
                                      const FitOptions& opt = {}) {
  if (times.size() != values.size()) throw InputError("fit: times and values differ in length");
  if (opt.sigmas && opt.sigmas->size() != times.size()) throw InputError("fit: sigmas differ in length");
  if (times.empty()) throw DegenerateFitError("fit: no samples");
  const double t0 = times.front(), t1 = times.back();
  const double cut = t0 + opt.discard_fraction * (t1 - t0);
  std::size_t i = 0;
  while (i < times.size() && times[i] < cut) ++i;
  while (i < times.size() && !(std::abs(values[i] - floor) > opt.noise_threshold)) ++i;
  std::vector<double> ts, ys, sig;
  for (; i < times.size(); ++i) {
    const double dy = std::abs(values[i] - floor);
    if (!(dy > opt.noise_threshold) || !(dy > 0.0)) break;
    ts.push_back(times[i]);
    ys.push_back(std::log(dy));
    const double s = opt.sigmas ? (*opt.sigmas)[i] : 0.0;
    sig.push_back(s > 0.0 ? s : 1.0);
  }
  if (ts.size() < opt.min_points)
    throw DegenerateFitError("fit: only " + std::to_string(ts.size()) + " samples above the noise floor (need " +
                             std::to_string(opt.min_points) + ")");
  // Log-space weights (y/sigma)^2 taken from the fitted curve, not the observations: weighting by
  // observed magnitudes favours upward fluctuations and biases the rate low.
  std::vector<double> ws(ts.size(), 1.0);
  double tm = 0.0, ym = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0, slope = 0.0;
  auto solve = [&] {
    double sw = 0.0, st = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      sw += ws[k];
      st += ws[k] * ts[k];
      sy += ws[k] * ys[k];
    }
    tm = st / sw;
    ym = sy / sw;
    sxx = sxy = syy = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      sxx += ws[k] * (ts[k] - tm) * (ts[k] - tm);
      sxy += ws[k] * (ts[k] - tm) * (ys[k] - ym);
      syy += ws[k] * (ys[k] - ym) * (ys[k] - ym);
    }
    if (!(sxx > 0.0)) throw DegenerateFitError("fit: all samples at one time");
    slope = sxy / sxx;
  };
  solve();
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double fitted = std::exp(ym + slope * (ts[k] - tm));
      ws[k] = (fitted * fitted) / (sig[k] * sig[k]);
    }
    solve();
  }
  double ssr = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = ys[k] - (ym + slope * (ts[k] - tm));
    ssr += ws[k] * r * r;
  }
  FitResult f;
  f.rate = -slope;
  f.amplitude = std::exp(ym - slope * tm);
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  f.window = {ts.front(), ts.back()};
  f.points = ts.size();
  double scale = ssr / static_cast<double>(ts.size() - 2);
  if (opt.sigmas) scale = std::max(scale, 1.0);
  f.rate_stderr = std::sqrt(scale / sxx);
  return f;
}

struct DistanceRow {
  double t = 0.0;
  double coupled = 0.0;
  double averaged = 0.0;
  double difference = 0.0;  ///< |coupled - averaged|
  double stderr_ = 0.0;     ///< combined standard error
};

struct AveragingDistance {
  double sup = 0.0;
  double sup_stderr = 0.0;  ///< combined standard error at the maximizing time
  double sup_time = 0.0;
  std::vector<DistanceRow> rows;
};

/// sup_t |system density (coupled) - system density (averaged)|.
inline AveragingDistance averaging_distance(const DensityEstimate& coupled, const DensityEstimate& averaged) {
  if (coupled.times.size() != averaged.times.size()) throw InputError("averaging_distance: sample times differ");
  AveragingDistance d;
  for (std::size_t i = 0; i < coupled.times.size(); ++i) {
    if (std::abs(coupled.times[i] - averaged.times[i]) > 1e-12 * (1.0 + std::abs(coupled.times[i])))
      throw InputError("averaging_distance: sample times differ");
    DistanceRow r{coupled.times[i], coupled.plus[i], averaged.plus[i], std::abs(coupled.plus[i] - averaged.plus[i]),
                  std::hypot(coupled.plus_se[i], averaged.plus_se[i])};
    if (d.rows.empty() || r.difference > d.sup) {
      d.sup = r.difference;
      d.sup_stderr = r.stderr_;
      d.sup_time = r.t;
    }
    d.rows.push_back(r);
  }
  return d;
}

// ---------------------------------------------------------------- ergodicity

struct ErgodicityOptions {
  double horizon = 1.5;  ///< short: the leading 10% is discarded and early samples carry most of the signal
  int intervals = 50;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  double high_density_factor = 2.0;  ///< second start: this multiple of rho_inv * volume uniform points
  std::size_t jackknife_groups = 10;
  unsigned threads = 1;
};

struct RelaxationCurve {
  std::string start;  ///< "empty" or "high_density"
  DensityEstimate density;
  std::vector<double> deviation;  ///< |rho_t - rho_inv|
  std::optional<FitResult> fit;
  std::string fit_error;
};

struct ErgodicityResult {
  double rho_inv = 0.0;
  double lambda0 = 0.0;
  std::vector<RelaxationCurve> curves;

  /// Fitted decay at least lambda0 - 2 sigma for every fitted curve.
  bool consistent_with_gap() const {
    for (const auto& c : curves)
      if (!c.fit || c.fit->rate < lambda0 - 2.0 * c.fit->rate_stderr) return false;
    return true;
  }
};

/// Environment-only replicas from the empty configuration and from a dense Poisson start;
/// fits the relaxation rate of |rho_t - rho_inv|.
template <class Model>
ErgodicityResult run_ergodicity(const Model& model, const Torus& t, double rho_inv, double lambda0,
                                const ErgodicityOptions& opt) {
  if (!(rho_inv >= 0.0)) throw InputError("ergodicity: invariant density must be >= 0");
  SimulationSettings st;
  st.mode = SimulationMode::environment_only;
  st.horizon = opt.horizon;
  st.seed = opt.seed;
  st.sample_times = uniform_times(opt.horizon, opt.intervals);
  ErgodicityResult res;
  res.rho_inv = rho_inv;
  res.lambda0 = lambda0;
  const auto dense = static_cast<std::size_t>(std::llround(opt.high_density_factor * rho_inv * t.volume()));
  const std::pair<std::string, InitialGenerator> starts[] = {
      {"empty", [](CounterRng&) { return MarkedConfiguration{}; }},
      {"high_density", [dense, &t](CounterRng& rng) { return uniform_configuration(0, dense, t, rng); }},
  };
  std::uint64_t salt = 0;
  for (const auto& [name, gen] : starts) {
    SimulationSettings s = st;
    s.seed = opt.seed + 0x9e3779b97f4a7c15ULL * salt++;
    const auto rep = replicate(model, t, s, gen, opt.replicas, opt.threads);
    RelaxationCurve c;
    c.start = name;
    c.density = estimate_density(rep.aggregate);
    for (double rho : c.density.minus) c.deviation.push_back(std::abs(rho - rho_inv));
    double typical = 0.0;
    for (double se : c.density.minus_se) typical = std::max(typical, se);
    auto fit_density = [&](const DensityEstimate& d) {
      std::vector<double> dev;
      for (double rho : d.minus) dev.push_back(std::abs(rho - rho_inv));
      FitOptions fo;
      fo.sigmas = d.minus_se;
      fo.noise_threshold = 3.0 * typical;
      return fit_exponential_rate(d.times, dev, 0.0, fo);
    };
    try {
      c.fit = fit_density(c.density);
    } catch (const DegenerateFitError& e) {
      c.fit_error = e.what();
    }
    // Samples share replicas across times, so the regression error understates the spread;
    // a delete-a-group jackknife over replicas replaces it.
    const std::size_t groups = std::min<std::size_t>(opt.jackknife_groups, rep.series.size());
    if (c.fit && groups >= 2) {
      std::vector<double> rates;
      try {
        for (std::size_t g = 0; g < groups; ++g) {
          std::vector<ObservableSeries> kept;
          for (std::size_t i = 0; i < rep.series.size(); ++i)
            if (i * groups / rep.series.size() != g) kept.push_back(rep.series[i]);
          rates.push_back(fit_density(estimate_density(aggregate_series(kept))).rate);
        }
        double mean = 0.0, ss = 0.0;
        for (double r : rates) mean += r / static_cast<double>(groups);
        for (double r : rates) ss += (r - mean) * (r - mean);
        c.fit->rate_stderr = std::sqrt(ss * static_cast<double>(groups - 1) / static_cast<double>(groups));
      } catch (const DegenerateFitError&) {
        // keep the regression error
      }
    }
    res.curves.push_back(std::move(c));
  }
  return res;
}

// ----------------------------------------------------------------- averaging

struct AveragingOptions {
  std::vector<double> epsilons{1.0, 0.3, 0.1};
  double horizon = 10.0;
  int intervals = 10;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  double burn_in = 20.0;  ///< environment-only warm-up for the stationary start
  unsigned threads = 1;
};

struct AveragingCurve {
  double epsilon = 1.0;
  std::string start;  ///< "empty" or "burn_in"
  DensityEstimate coupled;
  AveragingDistance distance;
};

struct AveragingResult {
  DensityEstimate averaged;
  std::vector<AveragingCurve> curves;

  /// Distances do not increase as epsilon decreases, up to 2 combined standard errors.
  bool monotone(const std::string& start) const {
    const AveragingCurve* prev = nullptr;
    for (const auto& c : curves) {
      if (c.start != start) continue;
      if (prev && c.distance.sup > prev->distance.sup + 2.0 * std::hypot(c.distance.sup_stderr, prev->distance.sup_stderr))
        return false;
      prev = &c;
    }
    return true;
  }
};

inline void validate_epsilons(std::span<const double> eps) {
  if (eps.empty()) throw InputError("averaging: epsilon list is empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InputError("averaging: epsilons must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw InputError("averaging: epsilons must be decreasing");
  }
}

inline AveragingResult run_averaging(const RateModel& m, const AveragedModel& am, const Torus& t,
                                     const AveragingOptions& opt) {
  validate_epsilons(opt.epsilons);
  const auto times = [&] {
    std::vector<double> ts;
    for (int i = 1; i <= opt.intervals; ++i) ts.push_back(opt.horizon * i / opt.intervals);
    return ts;
  }();
  AveragingResult res;
  {
    SimulationSettings s;
    s.mode = SimulationMode::averaged;
    s.horizon = opt.horizon;
    s.sample_times = times;
    s.seed = opt.seed ^ 0xa5a5a5a5a5a5a5a5ULL;
    const auto rep = replicate(am, t, s, MarkedConfiguration{}, opt.replicas, opt.threads);
    res.averaged = estimate_density(rep.aggregate);
  }
  SimulationSettings burn;
  burn.mode = SimulationMode::environment_only;
  burn.horizon = opt.burn_in;
  const std::pair<std::string, bool> starts[] = {{"empty", false}, {"burn_in", true}};
  for (const auto& [name, warm] : starts) {
    for (std::size_t e = 0; e < opt.epsilons.size(); ++e) {
      SimulationSettings s;
      s.mode = SimulationMode::coupled;
      s.epsilon = opt.epsilons[e];
      s.horizon = opt.horizon;
      s.sample_times = times;
      s.seed = opt.seed + 1000003ULL * (e + 1) + (warm ? 77ULL : 0ULL);
      InitialGenerator gen = [&, warm = warm](CounterRng& rng) {
        if (!warm || opt.burn_in <= 0.0) return MarkedConfiguration{};
        SimState w{MarkedConfiguration{}, 0.0, 0, 0, 0, 0, rng};
        while (true) {
          SimState before = w;
          detail::advance(w, m, t, burn);
          if (w.time > opt.burn_in) {
            rng = before.rng;
            return MarkedConfiguration{FiniteConfiguration{}, before.config.minus};
          }
        }
      };
      const auto rep = replicate(m, t, s, gen, opt.replicas, opt.threads);
      AveragingCurve c;
      c.epsilon = opt.epsilons[e];
      c.start = name;
      c.coupled = estimate_density(rep.aggregate);
      c.distance = averaging_distance(c.coupled, res.averaged);
      res.curves.push_back(std::move(c));
    }
  }
  return res;
}

}  // namespace sbd
