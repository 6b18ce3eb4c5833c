#pragma once

// Velocity field at energy E0 + dE obtained by marching the bridge equation
// outward from v(0) = 0, plus the two ways of evaluating it off-grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochmech/errors.hpp"
#include "stochmech/physics.hpp"

namespace stochmech {

// Uniform grid on [-L, L] with an odd node count so the center node is x = 0.
class CollocationGrid {
public:
  CollocationGrid(std::size_t n_points, double half_width) : n_(n_points), half_width_(half_width) {
    if (n_points < 5 || n_points % 2 == 0) {
      throw ConfigError("collocation grid needs an odd number of points >= 5, got " + std::to_string(n_points));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw ConfigError("collocation grid half width must be positive and finite");
    }
    spacing_ = 2.0 * half_width / static_cast<double>(n_points - 1);
    inv_spacing_ = static_cast<double>(n_points - 1) / (2.0 * half_width);
    const auto c = static_cast<std::ptrdiff_t>(center_index());
    nodes_.resize(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
      nodes_[j] = static_cast<double>(static_cast<std::ptrdiff_t>(j) - c) * spacing_;
    }
  }

  std::size_t size() const { return n_; }
  std::size_t center_index() const { return (n_ - 1) / 2; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  double inv_spacing() const { return inv_spacing_; }
  double node(std::size_t j) const { return nodes_[j]; }
  std::span<const double> nodes() const { return nodes_; }

  // Index j of the interval [x_j, x_{j+1}] holding x, clamped to [0, n-2].
  std::size_t segment(double x) const {
    double s = std::floor((x - nodes_.front()) * inv_spacing_);
    if (!(s >= 0.0)) s = 0.0;
    auto j = static_cast<std::size_t>(std::min(s, static_cast<double>(n_ - 2)));
    // floor() on the scaled coordinate can be off by one ulp at a node
    if (j > 0 && x < nodes_[j]) --j;
    if (j + 2 < n_ && x >= nodes_[j + 1]) ++j;
    return j;
  }

private:
  std::size_t n_;
  double half_width_;
  double spacing_;
  double inv_spacing_;
  std::vector<double> nodes_;
};

struct VelocityFieldTable {
  CollocationGrid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> diverged;
  EnergySpec energy;

  bool any_diverged() const {
    for (auto d : diverged)
      if (d) return true;
    return false;
  }
};

inline constexpr double kDefaultDivergenceCap = 1e12;

// Marches
//   v_{j+1} = v_j - (dx/hbar) [m v_j^2 - k x_j^2 + 2E]   (rightward)
//   v_{j-1} = v_j + (dx/hbar) [m v_j^2 - k x_j^2 + 2E]   (leftward)
// from v = 0 at the center node. Once a value is non-finite or exceeds the
// cap, that node and every node beyond it on the same side are diverged. The
// first diverged node keeps a signed infinity (or NaN); the rest hold NaN.
inline VelocityFieldTable solve_field(const PhysicalParams& p, const EnergySpec& energy, const CollocationGrid& grid,
                                      double divergence_cap = kDefaultDivergenceCap) {
  p.validate();
  const std::size_t n = grid.size();
  const std::size_t c = grid.center_index();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double step = grid.spacing() / p.hbar;
  const double two_e = 2.0 * energy.total;

  VelocityFieldTable table{grid, std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0), energy};
  auto bracket = [&](std::size_t j) {
    const double v = table.values[j];
    const double x = grid.node(j);
    return (p.mass * v * v - p.force_constant * x * x) + two_e;
  };
  auto mark = [&](std::size_t j, double raw, bool first) {
    table.diverged[j] = 1;
    if (first && !std::isnan(raw)) {
      table.values[j] = std::copysign(std::numeric_limits<double>::infinity(), raw);
    } else {
      table.values[j] = nan;
    }
  };

  table.values[c] = 0.0;
  bool blown = false;
  for (std::size_t j = c; j + 1 < n; ++j) {
    if (blown) {
      mark(j + 1, nan, false);
      continue;
    }
    const double next = table.values[j] - step * bracket(j);
    if (!std::isfinite(next) || std::abs(next) > divergence_cap) {
      mark(j + 1, next, true);
      blown = true;
    } else {
      table.values[j + 1] = next;
    }
  }
  blown = false;
  for (std::size_t j = c; j > 0; --j) {
    if (blown) {
      mark(j - 1, nan, false);
      continue;
    }
    const double next = table.values[j] + step * bracket(j);
    if (!std::isfinite(next) || std::abs(next) > divergence_cap) {
      mark(j - 1, next, true);
      blown = true;
    } else {
      table.values[j - 1] = next;
    }
  }
  return table;
}

inline std::vector<VelocityFieldTable> field_scan(const PhysicalParams& p, std::span<const double> defects,
                                                  const CollocationGrid& grid,
                                                  double divergence_cap = kDefaultDivergenceCap) {
  if (defects.empty()) throw ConfigError("field scan needs at least one energy defect");
  std::vector<VelocityFieldTable> out;
  out.reserve(defects.size());
  for (double d : defects) out.push_back(solve_field(p, energy_with_defect(p, d), grid, divergence_cap));
  return out;
}

// Distance from x = 0 to the closest diverged node, or +inf if none.
inline double basin_half_width(const VelocityFieldTable& t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    if (t.diverged[j]) best = std::min(best, std::abs(t.grid.node(j)));
  }
  return best;
}

struct InterpolatedValue {
  double value = 0.0;
  bool extrapolated = false;
};

enum class GlobalScheme { cubic_spline, barycentric };

// Node-exact interpolant over the whole table. The default is a natural cubic
// spline; the barycentric scheme is the single degree-(n-1) polynomial through
// all nodes and is badly conditioned on large equispaced grids.
class GlobalInterpolant {
public:
  explicit GlobalInterpolant(const VelocityFieldTable& table, GlobalScheme scheme = GlobalScheme::cubic_spline)
      : grid_(table.grid), values_(table.values), scheme_(scheme) {
    if (table.any_diverged()) {
      throw UnsupportedModeError("global interpolation is undefined on a table with diverged nodes; use local3");
    }
    const std::size_t n = values_.size();
    if (scheme_ == GlobalScheme::cubic_spline) {
      // M_{j-1} + 4 M_j + M_{j+1} = 6 (v_{j+1} - 2 v_j + v_{j-1}) / h^2, M_0 = M_{n-1} = 0
      curvature_.assign(n, 0.0);
      const double h2 = grid_.spacing() * grid_.spacing();
      const std::size_t m = n - 2;
      std::vector<double> diag(m, 4.0), rhs(m);
      for (std::size_t i = 0; i < m; ++i) {
        rhs[i] = 6.0 * (values_[i + 2] - 2.0 * values_[i + 1] + values_[i]) / h2;
      }
      for (std::size_t i = 1; i < m; ++i) {
        const double w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
      }
      curvature_[m] = rhs[m - 1] / diag[m - 1];
      for (std::size_t i = m - 1; i-- > 0;) {
        curvature_[i + 1] = (rhs[i] - curvature_[i + 2]) / diag[i];
      }
    } else {
      weights_.assign(n, 1.0);
      for (std::size_t j = 1; j < n; ++j) {
        weights_[j] = -weights_[j - 1] * static_cast<double>(n - j) / static_cast<double>(j);
      }
    }
  }

  InterpolatedValue operator()(double x) const {
    const bool outside = !(std::abs(x) <= grid_.half_width());
    return {scheme_ == GlobalScheme::cubic_spline ? spline(x) : barycentric(x), outside};
  }

  GlobalScheme scheme() const { return scheme_; }

private:
  double spline(double x) const {
    const std::size_t j = grid_.segment(x);
    const double h = grid_.spacing();
    const double t = (x - grid_.node(j)) / h;
    const double s = 1.0 - t;
    return s * values_[j] + t * values_[j + 1] +
           h * h / 6.0 * ((s * s * s - s) * curvature_[j] + (t * t * t - t) * curvature_[j + 1]);
  }

  double barycentric(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      const double d = x - grid_.node(j);
      if (d == 0.0) return values_[j];
      const double w = weights_[j] / d;
      num += w * values_[j];
      den += w;
    }
    return num / den;
  }

  CollocationGrid grid_;
  std::vector<double> values_;
  GlobalScheme scheme_;
  std::vector<double> curvature_;
  std::vector<double> weights_;
};

inline InterpolatedValue interpolate_global(const VelocityFieldTable& table, double x,
                                            GlobalScheme scheme = GlobalScheme::cubic_spline) {
  return GlobalInterpolant(table, scheme)(x);
}

// Quadratic through the bracketing pair of nodes and the nearer third
// neighbour (ties go to the side of the center node). Returns nullopt when x
// is outside [x_1, x_{n-2}] or any of the three nodes is diverged.
inline std::optional<double> interpolate_local3(const VelocityFieldTable& table, double x) {
  const CollocationGrid& g = table.grid;
  const std::size_t n = g.size();
  if (!(x >= g.node(1) && x <= g.node(n - 2))) return std::nullopt;

  std::size_t j = g.segment(x);
  if (j > n - 3) j = n - 3;
  const double dl = x - g.node(j);
  const double dr = g.node(j + 1) - x;
  std::size_t third;
  if (dl < dr) {
    third = j - 1;
  } else if (dl > dr) {
    third = j + 2;
  } else {
    third = (j + 1 <= g.center_index()) ? j + 2 : j - 1;
  }
  const std::size_t a = std::min(j, third);
  const std::size_t b = a + 1;
  const std::size_t c = a + 2;
  if (table.diverged[a] || table.diverged[b] || table.diverged[c]) return std::nullopt;

  const double va = table.values[a], vb = table.values[b], vc = table.values[c];
  if (x == g.node(a)) return va;
  if (x == g.node(b)) return vb;
  if (x == g.node(c)) return vc;
  const double t = (x - g.node(a)) * g.inv_spacing();
  return 0.5 * (t - 1.0) * (t - 2.0) * va - t * (t - 2.0) * vb + 0.5 * t * (t - 1.0) * vc;
}

} // namespace stochmech
