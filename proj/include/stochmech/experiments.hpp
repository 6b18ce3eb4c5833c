#pragma once

// Replicate ensembles for the three studies: density convergence against bin
// count and time step, energy-defect field scans, and state lifetime against
// time step and energy defect.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "stochmech/errors.hpp"
#include "stochmech/field.hpp"
#include "stochmech/histogram.hpp"
#include "stochmech/langevin.hpp"
#include "stochmech/physics.hpp"
#include "stochmech/rng.hpp"

namespace stochmech {

enum class InterpolationMode { global, local3, analytic };

inline const char* to_string(InterpolationMode m) {
  switch (m) {
  case InterpolationMode::global: return "global";
  case InterpolationMode::local3: return "local3";
  case InterpolationMode::analytic: return "analytic";
  }
  return "?";
}

inline const char* to_string(InitMode m) { return m == InitMode::uniform_full ? "uniform_full" : "near_minimum"; }

struct ExperimentConfig {
  PhysicalParams params;
  double dt = 0.005;
  std::uint64_t n_steps = 10'000'000;
  std::size_t n_bins = 128;
  std::size_t n_field = 129;
  double delta_e = 0.0;
  std::size_t replicates = 1;
  std::uint64_t seed_base = 0;
  double tau_max = 1e4;
  std::optional<double> escape_radius;           // default 5 L
  std::optional<InitMode> init_mode;             // default depends on the study
  std::optional<InterpolationMode> interpolation; // default depends on the study
  GlobalScheme global_scheme = GlobalScheme::cubic_spline;
  unsigned points_per_decade = 1;
  double divergence_cap = kDefaultDivergenceCap;
  unsigned threads = 0; // 0: hardware concurrency

  void validate() const {
    params.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
    if (n_field < 5 || n_field % 2 == 0) throw ConfigError("n_field must be odd and >= 5");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (!(tau_max > 0.0)) throw ConfigError("tau_max must be positive");
    if (escape_radius && !(*escape_radius > 0.0)) throw ConfigError("escape_radius must be positive");
    if (!std::isfinite(delta_e)) throw ConfigError("delta_e must be finite");
    if (points_per_decade < 1) throw ConfigError("points_per_decade must be >= 1");
    if (!(divergence_cap > 0.0)) throw ConfigError("divergence_cap must be positive");
  }

  double resolved_escape_radius() const { return escape_radius.value_or(5.0 * params.half_width); }
};

// Population standard deviation.
struct ReplicateStats {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;

  static ReplicateStats from(std::vector<double> v) {
    ReplicateStats s{std::move(v), 0.0, 0.0};
    if (s.values.empty()) return s;
    double sum = 0.0;
    for (double x : s.values) sum += x;
    s.mean = sum / static_cast<double>(s.values.size());
    double ss = 0.0;
    for (double x : s.values) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.values.size()));
    return s;
  }
};

// Runs body(i) for i in [0, count) on up to `threads` workers. Every index is
// visited exactly once; the first exception is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Calls fn with the drift evaluator selected by mode. The table is only used
// by the global and local3 modes.
template <typename Fn>
decltype(auto) with_drift(InterpolationMode mode, const PhysicalParams& p, const VelocityFieldTable& table,
                          GlobalScheme scheme, Fn&& fn) {
  switch (mode) {
  case InterpolationMode::global: return fn(GlobalDrift{GlobalInterpolant(table, scheme)});
  case InterpolationMode::local3: return fn(Local3Drift{&table});
  case InterpolationMode::analytic: break;
  }
  return fn(AnalyticDrift(p));
}

inline VelocityFieldTable solve_field_for(const ExperimentConfig& c) {
  return solve_field(c.params, energy_with_defect(c.params, c.delta_e),
                     CollocationGrid(c.n_field, c.params.half_width), c.divergence_cap);
}

inline std::vector<std::uint64_t> checkpoints_for(const ExperimentConfig& c) {
  if (c.n_steps < 10) return {c.n_steps};
  return checkpoint_schedule(c.n_steps, c.points_per_decade);
}

struct ReplicateRun {
  std::uint64_t stream_index = 0;
  double initial_position = 0.0;
  ResidencyHistogram histogram;
  FixedRunResult result;

  double final_sigma() const { return result.noise.empty() ? 0.0 : result.noise.back().sigma; }
};

// Fixed-length replicates of a single configuration. Replicate r uses
// RngStream(seed_base, stream_indices[r]).
inline std::vector<ReplicateRun> run_replicates(const ExperimentConfig& c,
                                                std::span<const std::uint64_t> stream_indices) {
  c.validate();
  const auto mode = c.interpolation.value_or(InterpolationMode::global);
  const auto init = c.init_mode.value_or(InitMode::uniform_full);
  const VelocityFieldTable table = solve_field_for(c);
  const auto checkpoints = checkpoints_for(c);
  const StepParams sp = StepParams::make(c.dt, c.params);
  const PhysicalParams params = c.params;
  const std::function<double(double)> oracle = [params](double x) { return ground_state_density(params, x); };

  std::vector<std::optional<ReplicateRun>> slots(stream_indices.size());
  with_drift(mode, c.params, table, c.global_scheme, [&](const auto& drift) {
    parallel_for(stream_indices.size(), c.threads, [&](std::size_t r) {
      RngStream rng(c.seed_base, stream_indices[r]);
      const double q0 = init_position(rng, init, c.params);
      ResidencyHistogram hist(c.n_bins, c.params.half_width);
      auto res = run_fixed(TrajectoryState{q0, 0.0, 0}, drift, sp, c.n_steps, hist, checkpoints, oracle, rng);
      slots[r].emplace(ReplicateRun{stream_indices[r], q0, std::move(hist), std::move(res)});
    });
    return 0;
  });
  std::vector<ReplicateRun> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline std::vector<std::uint64_t> default_streams(std::size_t replicates) {
  std::vector<std::uint64_t> s(replicates);
  for (std::size_t r = 0; r < replicates; ++r) s[r] = r;
  return s;
}

inline std::vector<ReplicateRun> run_replicates(const ExperimentConfig& c) {
  const auto streams = default_streams(c.replicates);
  return run_replicates(c, streams);
}

struct ConvergenceRow {
  std::size_t n_bins = 0;
  ReplicateStats final_sigma;
  std::vector<ReplicateRun> runs;
};

inline std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& base,
                                                     std::span<const std::size_t> n_bins_list) {
  if (n_bins_list.empty()) throw ConfigError("convergence study needs at least one bin count");
  std::vector<ConvergenceRow> out;
  for (std::size_t nb : n_bins_list) {
    ExperimentConfig c = base;
    c.n_bins = nb;
    auto runs = run_replicates(c);
    std::vector<double> sig;
    for (const auto& r : runs) sig.push_back(r.final_sigma());
    out.push_back({nb, ReplicateStats::from(std::move(sig)), std::move(runs)});
  }
  return out;
}

struct NoiseCurvePoint {
  std::uint64_t iteration = 0;
  ReplicateStats sigma;
};

struct DtSweepRow {
  double dt = 0.0;
  std::vector<NoiseCurvePoint> curve;
  ReplicateStats final_sigma;
  std::vector<ReplicateRun> runs;
};

inline constexpr double kDtSweepMin = 0.001;
inline constexpr double kDtSweepMax = 0.5;

inline std::vector<DtSweepRow> dt_sweep(const ExperimentConfig& base, std::span<const double> dt_list) {
  if (dt_list.empty()) throw ConfigError("dt sweep needs at least one time step");
  for (double dt : dt_list) {
    if (!(dt >= kDtSweepMin * (1 - 1e-12) && dt <= kDtSweepMax * (1 + 1e-12))) {
      throw ConfigError("dt sweep values must lie in [0.001, 0.5], got " + std::to_string(dt));
    }
  }
  std::vector<DtSweepRow> out;
  for (double dt : dt_list) {
    ExperimentConfig c = base;
    c.dt = dt;
    DtSweepRow row;
    row.dt = dt;
    row.runs = run_replicates(c);
    const std::size_t n_cp = row.runs.front().result.noise.size();
    for (std::size_t k = 0; k < n_cp; ++k) {
      std::vector<double> v;
      for (const auto& r : row.runs) v.push_back(r.result.noise[k].sigma);
      row.curve.push_back({row.runs.front().result.noise[k].iteration, ReplicateStats::from(std::move(v))});
    }
    std::vector<double> fin;
    for (const auto& r : row.runs) fin.push_back(r.final_sigma());
    row.final_sigma = ReplicateStats::from(std::move(fin));
    out.push_back(std::move(row));
  }
  return out;
}

struct PowerLaw {
  double amplitude = 0.0;
  double exponent = 0.0;
  double operator()(double x) const { return amplitude * std::pow(x, exponent); }
};

// Least-squares line through (log x, log y): y = amplitude * x^exponent.
inline PowerLaw powerlaw_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ConfigError("powerlaw_fit needs equally many x and y values");
  if (x.size() < 2) throw ConfigError("powerlaw_fit needs at least two points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("powerlaw_fit requires strictly positive data");
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) throw DomainError("powerlaw_fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  return {std::exp(my - slope * mx), slope};
}

struct LifetimeRow {
  double key = 0.0; // dt or delta_e depending on the study
  ReplicateStats tau;
};

struct LifetimeStudy {
  std::vector<LifetimeRow> rows;
  ReplicateStats combined; // all lifetimes pooled
};

inline std::vector<double> lifetimes(const ExperimentConfig& c, std::span<const std::uint64_t> stream_indices) {
  c.validate();
  const auto mode = c.interpolation.value_or(InterpolationMode::local3);
  const auto init = c.init_mode.value_or(InitMode::near_minimum);
  const VelocityFieldTable table = solve_field_for(c);
  const StepParams sp = StepParams::make(c.dt, c.params);
  std::vector<double> tau(stream_indices.size(), 0.0);
  with_drift(mode, c.params, table, c.global_scheme, [&](const auto& drift) {
    parallel_for(stream_indices.size(), c.threads, [&](std::size_t r) {
      RngStream rng(c.seed_base, stream_indices[r]);
      const double q0 = init_position(rng, init, c.params);
      tau[r] = run_until_escape(TrajectoryState{q0, 0.0, 0}, drift, sp, rng, c.tau_max, c.resolved_escape_radius());
    });
    return 0;
  });
  return tau;
}

inline LifetimeStudy pooled(std::vector<LifetimeRow> rows) {
  std::vector<double> all;
  for (const auto& r : rows) all.insert(all.end(), r.tau.values.begin(), r.tau.values.end());
  return {std::move(rows), ReplicateStats::from(std::move(all))};
}

inline LifetimeStudy lifetime_vs_dt(const ExperimentConfig& base, std::span<const double> dt_list) {
  if (dt_list.empty()) throw ConfigError("lifetime study needs at least one time step");
  if (base.delta_e == 0.0) throw ConfigError("lifetime vs dt is defined for a nonzero energy defect");
  const auto streams = default_streams(base.replicates);
  std::vector<LifetimeRow> rows;
  for (double dt : dt_list) {
    ExperimentConfig c = base;
    c.dt = dt;
    rows.push_back({dt, ReplicateStats::from(lifetimes(c, streams))});
  }
  return pooled(std::move(rows));
}

inline LifetimeStudy lifetime_vs_defect(const ExperimentConfig& base, std::span<const double> defects) {
  if (defects.empty()) throw ConfigError("lifetime study needs at least one energy defect");
  const auto streams = default_streams(base.replicates);
  std::vector<LifetimeRow> rows;
  for (double de : defects) {
    ExperimentConfig c = base;
    c.delta_e = de;
    rows.push_back({de, ReplicateStats::from(lifetimes(c, streams))});
  }
  return pooled(std::move(rows));
}

} // namespace stochmech
