#pragma once

// Residency histogram over [-L, L]: one count per recorded time step in the
// bin holding the walker, normalization to a probability density, and the
// solution-noise metric against a reference density.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stochmech/errors.hpp"

namespace stochmech {

class ResidencyHistogram {
public:
  ResidencyHistogram(std::size_t n_bins, double half_width)
      : half_width_(half_width), counts_(n_bins, 0) {
    if (n_bins < 2) throw ConfigError("histogram needs at least 2 bins");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("histogram half width must be positive");
    bin_width_ = 2.0 * half_width / static_cast<double>(n_bins);
    inv_bin_width_ = static_cast<double>(n_bins) / (2.0 * half_width);
  }

  // Bins are [-L + j dx, -L + (j+1) dx); x = +L goes to the last bin.
  // Anything else, including NaN and infinities, is out of range.
  void record(double q) {
    ++total_;
    if (!(q >= -half_width_ && q <= half_width_)) {
      ++out_of_range_;
      return;
    }
    auto j = static_cast<std::size_t>((q + half_width_) * inv_bin_width_);
    if (j >= counts_.size()) j = counts_.size() - 1;
    // the scaled index can round across an edge
    if (j > 0 && q < left_edge(j)) {
      --j;
    } else if (j + 1 < counts_.size() && q >= left_edge(j + 1)) {
      ++j;
    }
    ++counts_[j];
  }

  std::size_t n_bins() const { return counts_.size(); }
  double half_width() const { return half_width_; }
  double bin_width() const { return bin_width_; }
  double left_edge(std::size_t j) const { return -half_width_ + static_cast<double>(j) * bin_width_; }
  double center(std::size_t j) const { return -half_width_ + (static_cast<double>(j) + 0.5) * bin_width_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t out_of_range() const { return out_of_range_; }
  std::uint64_t total_recorded() const { return total_; }

  std::uint64_t in_range() const { return total_ - out_of_range_; }

  bool same_geometry(const ResidencyHistogram& o) const {
    return counts_.size() == o.counts_.size() && half_width_ == o.half_width_;
  }

  ResidencyHistogram& merge(const ResidencyHistogram& o) {
    if (!same_geometry(o)) throw ConfigError("cannot merge histograms with different geometry");
    for (std::size_t j = 0; j < counts_.size(); ++j) counts_[j] += o.counts_[j];
    out_of_range_ += o.out_of_range_;
    total_ += o.total_;
    return *this;
  }

  // Multiplies every counter; used to check scale invariance.
  void scale_counts(std::uint64_t factor) {
    for (auto& c : counts_) c *= factor;
    out_of_range_ *= factor;
    total_ *= factor;
  }

  friend bool operator==(const ResidencyHistogram&, const ResidencyHistogram&) = default;

private:
  double half_width_;
  double bin_width_ = 0.0;
  double inv_bin_width_ = 0.0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t out_of_range_ = 0;
  std::uint64_t total_ = 0;
};

enum class QuadratureRule { simpson, trapezoid };

inline const char* to_string(QuadratureRule r) { return r == QuadratureRule::simpson ? "simpson" : "trapezoid"; }

struct NormalizedDensity {
  std::vector<double> centers;
  std::vector<double> density;
  QuadratureRule quadrature_used = QuadratureRule::trapezoid;
  double bin_width = 0.0;
};

// Quadrature weights over [-L, L] for samples at the bin centers: the
// composite rule spans the first to last center, and the two half-bin caps
// at either end take the terminal sample value. Simpson needs an odd sample
// count (even number of intervals), so parity picks the rule.
inline std::vector<double> center_quadrature_weights(std::size_t n, double dx, QuadratureRule rule) {
  std::vector<double> w(n, dx);
  if (rule == QuadratureRule::simpson) {
    for (std::size_t j = 1; j + 1 < n; ++j) w[j] = (j % 2 == 1 ? 4.0 : 2.0) * dx / 3.0;
    w.front() = dx / 3.0;
    w.back() = dx / 3.0;
  } else {
    w.front() = dx / 2.0;
    w.back() = dx / 2.0;
  }
  w.front() += dx / 2.0;
  w.back() += dx / 2.0;
  return w;
}

inline QuadratureRule rule_for_bins(std::size_t n_bins) {
  return n_bins % 2 == 1 ? QuadratureRule::simpson : QuadratureRule::trapezoid;
}

inline double integrate(const NormalizedDensity& d) {
  const auto w = center_quadrature_weights(d.density.size(), d.bin_width, d.quadrature_used);
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * d.density[j];
  return s;
}

// Produces a density whose quadrature over [-L, L] is 1. Out-of-range counts
// are excluded; the histogram itself is left untouched.
inline NormalizedDensity normalize(const ResidencyHistogram& h) {
  if (h.in_range() == 0) throw DegenerateInputError("cannot normalize a histogram with no in-range samples");
  const std::size_t n = h.n_bins();
  NormalizedDensity out;
  out.quadrature_used = rule_for_bins(n);
  out.bin_width = h.bin_width();
  const auto w = center_quadrature_weights(n, h.bin_width(), out.quadrature_used);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) z += w[j] * static_cast<double>(h.counts()[j]);
  out.centers.resize(n);
  out.density.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.centers[j] = h.center(j);
    out.density[j] = static_cast<double>(h.counts()[j]) / z;
  }
  return out;
}

// sigma_n = (1/n) sum_j (a_j - b_j)^2
inline double solution_noise(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ConfigError("solution_noise needs two equal-length nonempty arrays");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

// Reference density evaluated at the bin centers (left edge + dx/2).
inline double solution_noise(const NormalizedDensity& d, const std::function<double(double)>& oracle) {
  std::vector<double> ref(d.centers.size());
  for (std::size_t j = 0; j < ref.size(); ++j) ref[j] = oracle(d.centers[j]);
  return solution_noise(ref, d.density);
}

// Iterations 10, ..., n_steps spaced points_per_decade per decade:
// floor(10^(1 + k/points_per_decade)), deduplicated, with n_steps appended
// when it is not already the last entry.
inline std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t n_steps, unsigned points_per_decade = 1) {
  if (n_steps < 10) throw ConfigError("checkpoint schedule needs n_steps >= 10");
  if (points_per_decade == 0) throw ConfigError("points_per_decade must be >= 1");
  std::vector<std::uint64_t> out;
  for (unsigned k = 0;; ++k) {
    const double e = 1.0 + static_cast<double>(k) / static_cast<double>(points_per_decade);
    const double raw = std::floor(std::pow(10.0, e) * (1.0 + 1e-12));
    if (raw > static_cast<double>(n_steps)) break;
    const auto it = static_cast<std::uint64_t>(raw);
    if (out.empty() || out.back() != it) out.push_back(it);
  }
  if (out.back() != n_steps) out.push_back(n_steps);
  return out;
}

} // namespace stochmech
