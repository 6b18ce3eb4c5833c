#pragma once

// Single-walker Langevin integration
//   q(t + dt) = q(t) + v(q) dt + xi sqrt(2 D dt),   xi ~ N(0, 1)
// with residency recording, noise checkpoints, and escape detection.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stochmech/errors.hpp"
#include "stochmech/field.hpp"
#include "stochmech/histogram.hpp"
#include "stochmech/physics.hpp"
#include "stochmech/rng.hpp"

namespace stochmech {

// A drift evaluator returns the velocity at q, or nullopt when the field is
// diverged there (the walker is then ejected).
template <typename F>
concept DriftField = requires(const F& f, double q) {
  { f(q) } -> std::convertible_to<std::optional<double>>;
};

struct AnalyticDrift {
  double omega = 1.0;
  explicit AnalyticDrift(const PhysicalParams& p) : omega(p.angular_frequency()) {}
  std::optional<double> operator()(double q) const { return -omega * q; }
};

struct GlobalDrift {
  GlobalInterpolant interpolant;
  std::optional<double> operator()(double q) const { return interpolant(q).value; }
};

struct Local3Drift {
  const VelocityFieldTable* table;
  std::optional<double> operator()(double q) const { return interpolate_local3(*table, q); }
};

struct StepParams {
  double dt = 0.0;
  double diffusion = 0.0;
  double noise_amplitude = 0.0; // sqrt(2 D dt)
  double ejection_distance = 0.0; // |q| assigned after hitting a diverged field

  static StepParams make(double dt, double diffusion, double half_width) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive and finite");
    if (!(diffusion > 0.0)) throw ConfigError("diffusion coefficient must be positive");
    return StepParams{dt, diffusion, std::sqrt(2.0 * diffusion * dt), 10.0 * half_width};
  }
  static StepParams make(double dt, const PhysicalParams& p) {
    return make(dt, diffusion_coefficient(p), p.half_width);
  }
};

struct TrajectoryState {
  double position = 0.0;
  double time = 0.0;
  std::uint64_t step_count = 0;
};

// One update with an explicit noise sample.
template <DriftField Drift>
TrajectoryState step_with_noise(const TrajectoryState& s, const Drift& drift, const StepParams& sp, double xi) {
  TrajectoryState next{s.position, 0.0, s.step_count + 1};
  const std::optional<double> v = drift(s.position);
  if (!v) {
    next.position = std::copysign(sp.ejection_distance, s.position);
  } else {
    next.position = s.position + *v * sp.dt + xi * sp.noise_amplitude;
  }
  next.time = static_cast<double>(next.step_count) * sp.dt;
  return next;
}

template <DriftField Drift>
TrajectoryState step(const TrajectoryState& s, const Drift& drift, const StepParams& sp, RngStream& rng) {
  return step_with_noise(s, drift, sp, rng.normal());
}

struct NoisePoint {
  std::uint64_t iteration = 0;
  double sigma = 0.0;
  friend bool operator==(const NoisePoint&, const NoisePoint&) = default;
};

struct FixedRunResult {
  TrajectoryState final_state;
  std::vector<NoisePoint> noise;
};

// Runs n_steps updates, recording every post-step position in sink. At each
// checkpoint a copy of the histogram is normalized and compared with the
// reference density.
template <DriftField Drift>
FixedRunResult run_fixed(const TrajectoryState& initial, const Drift& drift, const StepParams& sp,
                         std::uint64_t n_steps, ResidencyHistogram& sink, std::span<const std::uint64_t> checkpoints,
                         const std::function<double(double)>& oracle, RngStream& rng) {
  if (n_steps < 1) throw ConfigError("run_fixed needs n_steps >= 1");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] > n_steps || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw ConfigError("checkpoints must be strictly ascending and <= n_steps");
    }
  }
  FixedRunResult out{initial, {}};
  out.noise.reserve(checkpoints.size());
  std::size_t next_cp = 0;
  TrajectoryState s = initial;
  for (std::uint64_t i = 1; i <= n_steps; ++i) {
    s = step(s, drift, sp, rng);
    sink.record(s.position);
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == i) {
      out.noise.push_back({i, solution_noise(normalize(sink), oracle)});
      ++next_cp;
    }
  }
  out.final_state = s;
  return out;
}

inline bool escaped(double q, double escape_radius) { return !(std::abs(q) <= escape_radius); }

// Lifetime: time at which |q| exceeds escape_radius or q stops being finite,
// capped at tau_max. A walker that starts outside returns 0.
template <DriftField Drift>
double run_until_escape(const TrajectoryState& initial, const Drift& drift, const StepParams& sp, RngStream& rng,
                        double tau_max, double escape_radius) {
  if (!(tau_max > 0.0)) throw ConfigError("tau_max must be positive");
  if (!(escape_radius > 0.0)) throw ConfigError("escape radius must be positive");
  if (escaped(initial.position, escape_radius)) return 0.0;

  const double ratio = tau_max / sp.dt;
  auto max_steps = static_cast<std::uint64_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(max_steps)) > 1e-9 * ratio) {
    max_steps = static_cast<std::uint64_t>(std::ceil(ratio));
  }
  TrajectoryState s = initial;
  while (s.step_count < max_steps) {
    s = step(s, drift, sp, rng);
    if (escaped(s.position, escape_radius)) return std::min(s.time, tau_max);
  }
  return tau_max;
}

enum class InitMode { uniform_full, near_minimum };

inline double init_position(RngStream& rng, InitMode mode, const PhysicalParams& p) {
  const double w = mode == InitMode::uniform_full ? p.half_width : 0.1 * p.half_width;
  return rng.uniform(-w, w);
}

} // namespace stochmech
