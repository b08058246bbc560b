#pragma once

// Exact event-driven simulation of the coupled dynamics (environment sped up by 1/epsilon),
// the environment alone, or the averaged system, plus simple estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "sbd/averaged.hpp"
#include "sbd/errors.hpp"
#include "sbd/geometry.hpp"
#include "sbd/models.hpp"
#include "sbd/random.hpp"

namespace sbd {

enum class SimulationMode { coupled, environment_only, averaged };

inline std::string to_string(SimulationMode m) {
  switch (m) {
    case SimulationMode::coupled: return "coupled";
    case SimulationMode::environment_only: return "environment_only";
    case SimulationMode::averaged: return "averaged";
  }
  return "?";
}

struct SimulationSettings {
  double epsilon = 1.0;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t max_events = 10'000'000;
  std::vector<double> sample_times;
  SimulationMode mode = SimulationMode::coupled;
  bool keep_configurations = false;  ///< store the state at each sample time

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("simulation: epsilon must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InputError("simulation: horizon must be >= 0");
    if (max_events == 0) throw InputError("simulation: max_events must be positive");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
      const double s = sample_times[i];
      if (!(s >= 0.0) || s > horizon) throw InputError("simulation: sample times must lie in [0, horizon]");
      if (i > 0 && !(s > sample_times[i - 1])) throw InputError("simulation: sample times must be increasing");
    }
  }
};

/// Evenly spaced sample times 0, dt, ..., horizon.
inline std::vector<double> uniform_times(double horizon, int intervals) {
  if (intervals < 1) throw InputError("uniform_times: need at least one interval");
  std::vector<double> ts;
  for (int i = 0; i <= intervals; ++i) ts.push_back(horizon * i / intervals);
  return ts;
}

struct SimState {
  MarkedConfiguration config;
  double time = 0.0;
  std::uint64_t event_count = 0;
  std::uint64_t environment_events = 0;
  std::uint64_t system_events = 0;
  std::uint64_t rejected = 0;
  CounterRng rng{1, 0};
};

struct ObservableSeries {
  std::size_t replica = 0;
  double volume = 1.0;
  std::vector<double> times;
  std::vector<std::size_t> n_plus;
  std::vector<std::size_t> n_minus;
  std::vector<MarkedConfiguration> configurations;
  std::uint64_t events = 0;
  std::uint64_t environment_events = 0;
  std::uint64_t system_events = 0;
  double final_time = 0.0;

  double density_plus(std::size_t i) const { return static_cast<double>(n_plus[i]) / volume; }
  double density_minus(std::size_t i) const { return static_cast<double>(n_minus[i]) / volume; }
};

namespace detail {

/// Rates of all channels at the current state; birth proposals refer to `s.config`.
struct ChannelTable {
  std::vector<double> system_death;
  std::vector<double> environment_death;
  std::optional<BirthProposal> system_birth;
  std::optional<BirthProposal> environment_birth;
  double total = 0.0;
};

inline double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

template <class Model>
ChannelTable channel_table(const SimState& s, const Model& model, const Torus& t, const SimulationSettings& st) {
  ChannelTable c;
  const auto plus = s.config.plus.points();
  const auto minus = s.config.minus.points();
  const double speed = 1.0 / st.epsilon;
  if constexpr (std::is_same_v<Model, AveragedModel>) {
    for (std::size_t i = 0; i < plus.size(); ++i) c.system_death.push_back(avg_death(plus[i], plus, model, t, i));
    c.system_birth.emplace(averaged_birth_proposal(s.config.plus, model, t));
  } else {
    if (st.mode == SimulationMode::coupled) {
      for (std::size_t i = 0; i < plus.size(); ++i)
        c.system_death.push_back(sys_death(plus[i], plus, minus, model, t, i));
      c.system_birth.emplace(birth_proposal(Component::system, s.config, model, t));
    }
    for (std::size_t i = 0; i < minus.size(); ++i)
      c.environment_death.push_back(speed * env_death(minus[i], minus, model, t, i));
    c.environment_birth.emplace(birth_proposal(Component::environment, s.config, model, t));
  }
  c.total = sum(c.system_death) + sum(c.environment_death);
  if (c.system_birth) c.total += c.system_birth->total_mass();
  if (c.environment_birth) c.total += speed * c.environment_birth->total_mass();
  return c;
}

inline std::size_t pick(const std::vector<double>& w, double u) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

template <class Model>
void advance(SimState& s, const Model& model, const Torus& t, const SimulationSettings& st) {
  if (s.event_count >= st.max_events)
    throw ExplosionError("event limit " + std::to_string(st.max_events) + " reached at t=" + std::to_string(s.time),
                         s.time);
  const ChannelTable c = channel_table(s, model, t, st);
  if (!(c.total > 0.0)) {
    s.time = std::numeric_limits<double>::infinity();
    return;
  }
  s.time += s.rng.exponential(c.total);
  ++s.event_count;
  double u = s.rng.uniform() * c.total;

  const double sd = sum(c.system_death);
  if (u < sd) {
    s.config.plus.erase(pick(c.system_death, u));
    ++s.system_events;
    return;
  }
  u -= sd;
  const double sb = c.system_birth ? c.system_birth->total_mass() : 0.0;
  if (u < sb) {
    ++s.system_events;
    const Point x = c.system_birth->sample_candidate(s.rng);
    if (s.rng.uniform() < c.system_birth->acceptance(x)) s.config.plus.insert(x);
    else ++s.rejected;
    return;
  }
  u -= sb;
  const double ed = sum(c.environment_death);
  if (u < ed) {
    s.config.minus.erase(pick(c.environment_death, u));
    ++s.environment_events;
    return;
  }
  ++s.environment_events;
  if (!c.environment_birth) return;
  const Point x = c.environment_birth->sample_candidate(s.rng);
  if (s.rng.uniform() < c.environment_birth->acceptance(x)) s.config.minus.insert(x);
  else ++s.rejected;
}

template <class Model>
void check_mode(const SimulationSettings& st) {
  if constexpr (std::is_same_v<Model, AveragedModel>) {
    if (st.mode != SimulationMode::averaged) throw InputError("simulation: an averaged model needs mode 'averaged'");
  } else {
    if (st.mode == SimulationMode::averaged) throw InputError("simulation: mode 'averaged' needs an averaged model");
  }
}

}  // namespace detail

/// One event (possibly a rejected candidate). A state with no active channel jumps to t = inf.
template <class Model>
SimState next_event(SimState s, const Model& model, const Torus& t, const SimulationSettings& st) {
  detail::check_mode<Model>(st);
  detail::advance(s, model, t, st);
  return s;
}

template <class Model>
ObservableSeries run_state(SimState s, const Model& model, const Torus& t, const SimulationSettings& st) {
  st.validate();
  detail::check_mode<Model>(st);
  for (const auto& p : s.config.plus) t.check_dim(p);
  for (const auto& p : s.config.minus) t.check_dim(p);
  ObservableSeries out;
  out.volume = t.volume();
  auto record = [&](double time) {
    out.times.push_back(time);
    out.n_plus.push_back(s.config.plus.size());
    out.n_minus.push_back(s.config.minus.size());
    if (st.keep_configurations) out.configurations.push_back(s.config);
  };
  std::size_t next = 0;
  const auto& ts = st.sample_times;
  while (next < ts.size() && ts[next] <= s.time) record(ts[next++]);
  while (s.time <= st.horizon) {
    SimState before = s;
    detail::advance(s, model, t, st);
    if (s.time > st.horizon) {
      // The jump happens after the horizon: observe the pre-jump state only.
      s = std::move(before);
      break;
    }
    while (next < ts.size() && ts[next] < s.time) {
      std::swap(s, before);
      record(ts[next++]);
      std::swap(s, before);
    }
  }
  while (next < ts.size()) record(ts[next++]);
  out.events = s.event_count;
  out.environment_events = s.environment_events;
  out.system_events = s.system_events;
  out.final_time = std::min(s.time, st.horizon);
  return out;
}

template <class Model>
ObservableSeries run(const Model& model, const Torus& t, const SimulationSettings& st,
                     const MarkedConfiguration& initial, std::uint64_t stream = 0) {
  SimState s{initial, 0.0, 0, 0, 0, 0, CounterRng(st.seed, stream)};
  return run_state(std::move(s), model, t, st);
}

using InitialGenerator = std::function<MarkedConfiguration(CounterRng&)>;

/// Poisson-distributed uniform points with the given mean count per component.
inline MarkedConfiguration poisson_configuration(double mean_plus, double mean_minus, const Torus& t,
                                                 CounterRng& rng) {
  auto draw = [&](double mean) {
    FiniteConfiguration c;
    const std::uint64_t n = mean > 0.0 ? rng.poisson(mean) : 0;
    for (std::uint64_t i = 0; i < n; ++i) c.insert(t.uniform_point(rng));
    return c;
  };
  FiniteConfiguration p = draw(mean_plus);
  FiniteConfiguration m = draw(mean_minus);
  return {std::move(p), std::move(m)};
}

/// Exactly n_plus and n_minus independent uniform points (binomial process).
inline MarkedConfiguration uniform_configuration(std::size_t n_plus, std::size_t n_minus, const Torus& t,
                                                 CounterRng& rng) {
  MarkedConfiguration c;
  for (std::size_t i = 0; i < n_plus; ++i) c.plus.insert(t.uniform_point(rng));
  for (std::size_t i = 0; i < n_minus; ++i) c.minus.insert(t.uniform_point(rng));
  return c;
}

struct Aggregate {
  std::vector<double> times;
  std::vector<double> mean_plus, se_plus, mean_minus, se_minus;  ///< counts
  double volume = 1.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::vector<std::string> warnings;
};

struct ReplicateResult {
  std::vector<ObservableSeries> series;  ///< completed replicas in replica order
  Aggregate aggregate;
};

inline Aggregate aggregate_series(std::span<const ObservableSeries> series) {
  Aggregate a;
  if (series.empty()) return a;
  a.times = series.front().times;
  a.volume = series.front().volume;
  a.completed = series.size();
  const std::size_t k = a.times.size();
  a.mean_plus.assign(k, 0.0);
  a.se_plus.assign(k, 0.0);
  a.mean_minus.assign(k, 0.0);
  a.se_minus.assign(k, 0.0);
  const double r = static_cast<double>(series.size());
  for (std::size_t i = 0; i < k; ++i) {
    double sp = 0.0, sm = 0.0;
    for (const auto& s : series) {
      sp += static_cast<double>(s.n_plus[i]);
      sm += static_cast<double>(s.n_minus[i]);
    }
    a.mean_plus[i] = sp / r;
    a.mean_minus[i] = sm / r;
    if (series.size() > 1) {
      double vp = 0.0, vm = 0.0;
      for (const auto& s : series) {
        vp += std::pow(static_cast<double>(s.n_plus[i]) - a.mean_plus[i], 2);
        vm += std::pow(static_cast<double>(s.n_minus[i]) - a.mean_minus[i], 2);
      }
      a.se_plus[i] = std::sqrt(vp / (r - 1.0) / r);
      a.se_minus[i] = std::sqrt(vm / (r - 1.0) / r);
    }
  }
  return a;
}

/// R independent replicas; replica i uses stream i of the master seed. The initial state is
/// drawn from the replica's own generator before the dynamics start.
template <class Model>
ReplicateResult replicate(const Model& model, const Torus& t, const SimulationSettings& st,
                          const InitialGenerator& initial, std::size_t replicas, unsigned threads = 1) {
  if (replicas < 1) throw InputError("replicate: need at least one replica");
  st.validate();
  std::vector<std::optional<ObservableSeries>> slots(replicas);
  std::vector<std::string> errors(replicas);
  auto work = [&](std::size_t i) {
    try {
      CounterRng rng(st.seed, i);
      MarkedConfiguration init = initial(rng);
      SimState s{std::move(init), 0.0, 0, 0, 0, 0, rng};
      auto series = run_state(std::move(s), model, t, st);
      series.replica = i;
      slots[i] = std::move(series);
    } catch (const ExplosionError& e) {
      errors[i] = e.what();
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < replicas; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < replicas; i += threads) work(i);
      });
    for (auto& th : pool) th.join();
  }
  ReplicateResult res;
  for (std::size_t i = 0; i < replicas; ++i)
    if (slots[i]) res.series.push_back(std::move(*slots[i]));
  res.aggregate = aggregate_series(res.series);
  for (std::size_t i = 0; i < replicas; ++i) {
    if (!errors[i].empty()) {
      ++res.aggregate.failed;
      res.aggregate.warnings.push_back("replica " + std::to_string(i) + ": " + errors[i]);
    }
  }
  if (res.series.empty()) throw ExplosionError("replicate: every replica hit the event limit", 0.0);
  return res;
}

template <class Model>
ReplicateResult replicate(const Model& model, const Torus& t, const SimulationSettings& st,
                          const MarkedConfiguration& initial, std::size_t replicas, unsigned threads = 1) {
  return replicate(model, t, st, InitialGenerator([initial](CounterRng&) { return initial; }), replicas, threads);
}

struct DensityEstimate {
  std::vector<double> times;
  std::vector<double> plus, plus_se, minus, minus_se;
};

inline DensityEstimate estimate_density(const Aggregate& a) {
  DensityEstimate d;
  d.times = a.times;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    d.plus.push_back(a.mean_plus[i] / a.volume);
    d.plus_se.push_back(a.se_plus[i] / a.volume);
    d.minus.push_back(a.mean_minus[i] / a.volume);
    d.minus_se.push_back(a.se_minus[i] / a.volume);
  }
  return d;
}

inline DensityEstimate estimate_density(const ObservableSeries& s) {
  return estimate_density(aggregate_series(std::span<const ObservableSeries>(&s, 1)));
}

struct PairCorrelation {
  std::vector<double> r;  ///< bin centers
  std::vector<double> g;
  std::vector<double> stderr_;
  std::vector<bool> undefined;
};

/// Distance-histogram estimator of g(r) pooled over configurations (ratio estimator,
/// delta-method error).
inline PairCorrelation estimate_pair_correlation(std::span<const FiniteConfiguration> configs, const Torus& t,
                                                 double bin_width, double r_max) {
  if (!(bin_width > 0.0)) throw InputError("pair correlation: bin width must be positive");
  if (!(r_max > 0.0) || r_max > 0.5 * t.side() * (1.0 + 1e-12))
    throw InputError("pair correlation: r_max must lie in (0, L/2]");
  const auto bins = static_cast<std::size_t>(std::ceil(r_max / bin_width - 1e-12));
  const double vol = t.volume();
  std::vector<std::vector<double>> hist(configs.size(), std::vector<double>(bins, 0.0));
  std::vector<double> pairs(configs.size(), 0.0);
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& cfg = configs[c];
    const double n = static_cast<double>(cfg.size());
    pairs[c] = n * (n - 1.0);
    for (std::size_t i = 0; i < cfg.size(); ++i)
      for (std::size_t j = i + 1; j < cfg.size(); ++j) {
        const double r = torus_distance(cfg[i], cfg[j], t);
        if (r >= r_max) continue;
        const auto b = static_cast<std::size_t>(r / bin_width);
        if (b < bins) hist[c][b] += 2.0;
      }
  }
  PairCorrelation out;
  const double k = static_cast<double>(configs.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = b * bin_width, hi = std::min(r_max, (b + 1) * bin_width);
    const double shell = ball_volume(t.dim(), hi) - ball_volume(t.dim(), lo);
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
      num += hist[c][b];
      den += pairs[c] * shell / vol;
    }
    out.r.push_back(0.5 * (lo + hi));
    if (!(den > 0.0)) {
      out.g.push_back(0.0);
      out.stderr_.push_back(0.0);
      out.undefined.push_back(true);
      continue;
    }
    const double g = num / den;
    double s2 = 0.0;
    for (std::size_t c = 0; c < configs.size(); ++c) s2 += std::pow(hist[c][b] - g * pairs[c] * shell / vol, 2);
    const double se = k > 1.0 ? std::sqrt(s2 * k / (k - 1.0)) / den : 0.0;
    out.g.push_back(g);
    out.stderr_.push_back(se);
    out.undefined.push_back(false);
  }
  return out;
}

}  // namespace sbd
