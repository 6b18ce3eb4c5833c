#pragma once

// Unit system and the analytic quantum harmonic oscillator reference:
// ground-state energy, drift field, density, and the bridge-equation residual
//   -(hbar/2) dv/dx - (m/2) v^2 + V(x) - E,   V(x) = k x^2 / 2.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "stochmech/errors.hpp"

namespace stochmech {

// Atomic units by default (hbar = m = k = 1).
struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double force_constant = 1.0;
  double half_width = 5.0; // domain is [-L, +L]

  void validate() const {
    if (!(hbar > 0.0) || !(mass > 0.0) || !(force_constant > 0.0) || !(half_width > 0.0)) {
      throw ConfigError("physical parameters hbar, mass, force_constant and half_width must be positive");
    }
  }

  double angular_frequency() const { return std::sqrt(force_constant / mass); }
  double potential(double x) const { return 0.5 * force_constant * x * x; }
};

struct EnergySpec {
  double ground_energy = 0.0;
  double defect = 0.0;
  double total = 0.0;

  static EnergySpec with_defect(double ground, double defect) {
    return EnergySpec{ground, defect, ground + defect};
  }
};

inline double diffusion_coefficient(const PhysicalParams& p) { return p.hbar / (2.0 * p.mass); }

inline double ground_state_energy(const PhysicalParams& p) {
  return 0.5 * p.hbar * p.angular_frequency();
}

inline EnergySpec energy_with_defect(const PhysicalParams& p, double defect) {
  return EnergySpec::with_defect(ground_state_energy(p), defect);
}

inline double analytic_velocity(const PhysicalParams& p, double x) {
  return -p.angular_frequency() * x;
}

// |psi_0(x)|^2, normalized over the real line.
inline double ground_state_density(const PhysicalParams& p, double x) {
  const double a = p.mass * p.angular_frequency() / p.hbar;
  return std::sqrt(a / std::numbers::pi) * std::exp(-a * x * x);
}

inline double bridge_residual(const PhysicalParams& p, double v, double dv_dx, double x, double energy) {
  return -0.5 * p.hbar * dv_dx - 0.5 * p.mass * v * v + p.potential(x) - energy;
}

struct WavefunctionDrift {
  std::vector<double> values; // NaN where invalid
  std::vector<bool> valid;
};

// Drift from a sampled wavefunction on a uniform grid:
//   v = (hbar/m) * (Re[psi'/psi] + Im[psi'/psi]).
// psi' uses central differences inside and second-order one-sided
// differences at the two endpoints. Nodes with |psi| < magnitude_floor are
// flagged invalid.
inline WavefunctionDrift velocity_from_wavefunction(std::span<const std::complex<double>> psi, double spacing,
                                                    const PhysicalParams& p, double magnitude_floor = 1e-12) {
  const std::size_t n = psi.size();
  if (n < 3) throw ConfigError("velocity_from_wavefunction needs at least 3 samples");
  if (!(spacing > 0.0)) throw ConfigError("grid spacing must be positive");

  WavefunctionDrift out;
  out.values.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.valid.assign(n, false);

  const double scale = p.hbar / p.mass;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(psi[j]) < magnitude_floor) continue;
    std::complex<double> grad;
    if (j == 0) {
      grad = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * spacing);
    } else if (j == n - 1) {
      grad = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * spacing);
    } else {
      grad = (psi[j + 1] - psi[j - 1]) / (2.0 * spacing);
    }
    const std::complex<double> ratio = grad / psi[j];
    out.values[j] = scale * (ratio.real() + ratio.imag());
    out.valid[j] = true;
  }
  return out;
}

} // namespace stochmech
