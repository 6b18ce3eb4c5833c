#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stochmech/field.hpp"

using namespace stochmech;

namespace {

const PhysicalParams kUnit{};

VelocityFieldTable solve(double defect, std::size_t n = 129, double L = 5.0) {
  return solve_field(kUnit, energy_with_defect(kUnit, defect), CollocationGrid(n, L));
}

VelocityFieldTable table_from(std::size_t n, double L, double (*f)(double)) {
  CollocationGrid g(n, L);
  VelocityFieldTable t{g, std::vector<double>(n), std::vector<std::uint8_t>(n, 0), energy_with_defect(kUnit, 0)};
  for (std::size_t j = 0; j < n; ++j) t.values[j] = f(g.node(j));
  return t;
}

// Lagrange quadratic through three given points; reference for local3.
double quad_through(double x, double x0, double y0, double x1, double y1, double x2, double y2) {
  return y0 * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2)) + y1 * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2)) +
         y2 * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
}

} // namespace

TEST(CollocationGrid, Geometry) {
  CollocationGrid g(129, 5.0);
  EXPECT_EQ(g.node(g.center_index()), 0.0);
  EXPECT_DOUBLE_EQ(g.node(0), -5.0);
  EXPECT_DOUBLE_EQ(g.node(128), 5.0);
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    EXPECT_LT(std::abs(g.node(j + 1) - g.node(j) - g.spacing()), 1e-12 * 5.0);
  }
  EXPECT_THROW(CollocationGrid(128, 5.0), ConfigError);
  EXPECT_THROW(CollocationGrid(3, 5.0), ConfigError);
  EXPECT_THROW(CollocationGrid(9, -1.0), ConfigError);
}

TEST(SolveField, FirstStepsByHand) {
  // n = 101 on [-5, 5] gives dx = 0.1
  const auto t = solve(0.0, 101, 5.0);
  ASSERT_NEAR(t.grid.spacing(), 0.1, 1e-15);
  EXPECT_NEAR(t.values[51], -0.1, 1e-15);
  EXPECT_NEAR(t.values[52], -0.2, 1e-15);
  EXPECT_NEAR(t.values[49], 0.1, 1e-15);

  const auto d = solve(0.01, 101, 5.0);
  EXPECT_NEAR(d.values[51], -0.102, 1e-15);
  EXPECT_NEAR(d.values[49], 0.102, 1e-15);
  EXPECT_EQ(d.values[50], 0.0);
}

TEST(SolveField, ExactLinearFieldAtGroundEnergy) {
  const auto t = solve(0.0);
  double worst = 0;
  for (std::size_t j = 0; j < t.values.size(); ++j) worst = std::max(worst, std::abs(t.values[j] + t.grid.node(j)));
  EXPECT_LE(worst, 1e-10);
  EXPECT_FALSE(t.any_diverged());
  EXPECT_EQ(t.values[t.grid.center_index()], 0.0);
}

// The marching scheme reproduces v = -x exactly, but any rounding error is
// amplified like exp(x^2) (the growing solution of the Riccati equation), so
// the 1e-10 bound holds on grids where the arithmetic is exact (dyadic
// spacings) for every L, and on arbitrary grids only for moderate L.
TEST(SolveField, ExactnessPropertyAcrossGrids) {
  for (double L : {0.5, 1.0, 2.0, 2.5, 5.0, 7.5, 10.0}) {
    for (std::size_t k = 2; k <= 11; ++k) {
      const std::size_t n = (std::size_t{1} << k) + 1;
      const auto t = solve(0.0, n, L);
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_LE(std::abs(t.values[j] + t.grid.node(j)), 1e-10) << "L=" << L << " n=" << n;
        ASSERT_LE(std::abs(t.values[j] + t.values[n - 1 - j]), 1e-10) << "L=" << L << " n=" << n;
      }
    }
  }
  std::mt19937 gen(7);
  std::uniform_int_distribution<std::size_t> half(2, 500);
  std::uniform_real_distribution<double> width(0.2, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 * half(gen) + 1;
    const double L = width(gen);
    const auto t = solve(0.0, n, L);
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_LE(std::abs(t.values[j] + t.grid.node(j)), 1e-10) << "L=" << L << " n=" << n;
      ASSERT_LE(std::abs(t.values[j] + t.values[n - 1 - j]), 1e-10);
    }
  }
}

TEST(SolveField, NegativeDefectTurnsSlopePositive) {
  const auto t = solve(-0.02);
  EXPECT_FALSE(t.any_diverged());
  bool positive_slope = false;
  for (std::size_t j = 0; j + 1 < t.values.size(); ++j) {
    positive_slope = positive_slope || (t.values[j + 1] - t.values[j]) / t.grid.spacing() > 0;
  }
  EXPECT_TRUE(positive_slope);
  // near the center the field still follows -x
  EXPECT_NEAR(t.values[t.grid.center_index() + 4], -t.grid.node(t.grid.center_index() + 4), 0.05);
}

TEST(SolveField, PositiveDefectDivergesAtFringes) {
  const auto t = solve(0.03);
  ASSERT_TRUE(t.any_diverged());
  EXPECT_TRUE(t.diverged.front());
  EXPECT_TRUE(t.diverged.back());
  EXPECT_FALSE(t.diverged[t.grid.center_index()]);
  // diverged flags are contiguous from each edge
  const std::size_t c = t.grid.center_index();
  for (std::size_t j = c; j + 1 < t.values.size(); ++j) {
    if (t.diverged[j]) {
      EXPECT_TRUE(t.diverged[j + 1]);
    }
  }
  for (std::size_t j = c; j > 0; --j) {
    if (t.diverged[j]) {
      EXPECT_TRUE(t.diverged[j - 1]);
    }
  }
  // first diverged node on the right carries -inf, the rest are unknown
  std::size_t first = c;
  while (!t.diverged[first]) ++first;
  EXPECT_TRUE(std::isinf(t.values[first]));
  EXPECT_LT(t.values[first], 0);
  EXPECT_TRUE(std::isnan(t.values[first + 1]));
}

TEST(SolveField, DivergenceCapIsConfigurable) {
  const PhysicalParams p{};
  const CollocationGrid g(129, 5.0);
  const auto loose = solve_field(p, energy_with_defect(p, 0.03), g, 1e12);
  const auto tight = solve_field(p, energy_with_defect(p, 0.03), g, 100.0);
  EXPECT_LE(basin_half_width(tight), basin_half_width(loose));
}

TEST(SolveField, BasinShrinksWithDefect) {
  double prev = std::numeric_limits<double>::infinity();
  for (double de : {0.01, 0.02, 0.03, 0.05}) {
    const double w = basin_half_width(solve(de));
    EXPECT_LE(w, prev) << "dE=" << de;
    EXPECT_LT(w, 5.0);
    prev = w;
  }
  EXPECT_TRUE(std::isinf(basin_half_width(solve(0.0))));
}

// Checked at nodes shared by all grids and inside the basin; next to a pole
// the local error constant blows up.
TEST(SolveField, BridgeResidualIsFirstOrderInSpacing) {
  for (double de : {-0.02, 0.03}) {
    std::vector<double> prev;
    for (std::size_t n : {129u, 257u, 513u, 1025u}) {
      const auto t = solve(de, n);
      const double h = t.grid.spacing();
      const std::size_t c = t.grid.center_index();
      const std::size_t stride = (n - 1) / 32;
      std::vector<double> res;
      for (std::size_t k = 1; k <= 4; ++k) {
        for (std::size_t j : {c + k * stride, c - k * stride}) {
          const double dv = (t.values[j + 1] - t.values[j - 1]) / (2 * h);
          res.push_back(std::abs(bridge_residual(kUnit, t.values[j], dv, t.grid.node(j), t.energy.total)));
        }
      }
      for (std::size_t i = 0; i < prev.size(); ++i) {
        EXPECT_GT(res[i], 0.0);
        EXPECT_LT(res[i], 0.75 * prev[i]) << "dE=" << de << " n=" << n << " i=" << i;
      }
      prev = res;
    }
  }
}

TEST(FieldScan, OneTablePerDefectInOrder) {
  const CollocationGrid g(129, 5.0);
  const std::vector<double> des{0.0};
  const auto single = field_scan(kUnit, des, g);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].values, solve(0.0).values);

  const std::vector<double> many{-0.02, 0.0, 0.03};
  const auto scan = field_scan(kUnit, many, g);
  ASSERT_EQ(scan.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(scan[i].energy.defect, many[i]);
  EXPECT_THROW(field_scan(kUnit, std::vector<double>{}, g), ConfigError);
}

TEST(GlobalInterpolation, NodeExactAndLinearExact) {
  const auto t = solve(0.0);
  const GlobalInterpolant gi(t);
  for (std::size_t j = 0; j < t.values.size(); ++j) EXPECT_EQ(gi(t.grid.node(j)).value, t.values[j]);
  for (double x = -5.0; x <= 5.0; x += 0.0137) {
    const auto r = gi(x);
    EXPECT_NEAR(r.value, -x, 1e-9);
    EXPECT_FALSE(r.extrapolated);
  }
  EXPECT_NEAR(gi(0.0).value, 0.0, 1e-12);
  const auto out = gi(5.3);
  EXPECT_TRUE(out.extrapolated);
  EXPECT_NEAR(out.value, -5.3, 1e-9);
}

TEST(GlobalInterpolation, SplineIsNodeExactOnCurvedData) {
  const auto t = solve(-0.02);
  const GlobalInterpolant gi(t);
  for (std::size_t j = 0; j < t.values.size(); ++j) EXPECT_EQ(gi(t.grid.node(j)).value, t.values[j]);
  // smooth between nodes: stays within the local range of neighbouring values
  for (std::size_t j = 0; j + 1 < t.values.size(); ++j) {
    const double mid = gi(0.5 * (t.grid.node(j) + t.grid.node(j + 1))).value;
    const double lo = std::min(t.values[j], t.values[j + 1]), hi = std::max(t.values[j], t.values[j + 1]);
    EXPECT_GE(mid, lo - 0.05 * (hi - lo) - 1e-12);
    EXPECT_LE(mid, hi + 0.05 * (hi - lo) + 1e-12);
  }
}

TEST(GlobalInterpolation, BarycentricPolynomial) {
  const auto lin = solve(0.0, 17, 2.0);
  const GlobalInterpolant bary(lin, GlobalScheme::barycentric);
  for (std::size_t j = 0; j < lin.values.size(); ++j) EXPECT_EQ(bary(lin.grid.node(j)).value, lin.values[j]);
  for (double x = -2.0; x <= 2.0; x += 0.031) EXPECT_NEAR(bary(x).value, -x, 1e-9);

  // reproduces any polynomial of degree < n
  const auto cubic = table_from(9, 1.0, [](double x) { return 1 - 2 * x + 0.5 * x * x * x; });
  const GlobalInterpolant b2(cubic, GlobalScheme::barycentric);
  for (double x = -1.0; x <= 1.0; x += 0.07) EXPECT_NEAR(b2(x).value, 1 - 2 * x + 0.5 * x * x * x, 1e-12);
}

TEST(GlobalInterpolation, RejectsDivergedTables) {
  const auto t = solve(0.03);
  EXPECT_THROW(GlobalInterpolant{t}, UnsupportedModeError);
  EXPECT_THROW(interpolate_global(t, 0.0), UnsupportedModeError);
}

TEST(Local3Interpolation, Examples) {
  const auto t = solve(0.0);
  for (std::size_t j = 1; j + 1 < t.values.size(); ++j) EXPECT_EQ(*interpolate_local3(t, t.grid.node(j)), t.values[j]);
  EXPECT_NEAR(*interpolate_local3(t, 0.05), -0.05, 1e-10);
  EXPECT_FALSE(interpolate_local3(t, t.grid.node(0)).has_value());
  EXPECT_FALSE(interpolate_local3(t, 4.95).has_value());
  EXPECT_FALSE(interpolate_local3(t, std::nan("")).has_value());
  EXPECT_TRUE(interpolate_local3(t, t.grid.node(1)).has_value());
  EXPECT_TRUE(interpolate_local3(t, t.grid.node(127)).has_value());
}

TEST(Local3Interpolation, ExactOnQuadraticData) {
  const auto t = table_from(33, 2.0, [](double x) { return 0.3 - x + 2 * x * x; });
  for (double x = t.grid.node(1); x <= t.grid.node(31); x += 0.0093) {
    EXPECT_NEAR(*interpolate_local3(t, x), 0.3 - x + 2 * x * x, 1e-12);
  }
}

TEST(Local3Interpolation, NearerThirdNodeAndCenterTieBreak) {
  const auto t = table_from(17, 2.0, [](double x) { return x * x * x; });
  const auto& g = t.grid;
  const double h = g.spacing();
  // right of center, x closer to the left node of [x_10, x_11]: third node x_9
  const double x1 = g.node(10) + 0.2 * h;
  EXPECT_NEAR(*interpolate_local3(t, x1),
              quad_through(x1, g.node(9), t.values[9], g.node(10), t.values[10], g.node(11), t.values[11]), 1e-13);
  // closer to the right node: third node x_12
  const double x2 = g.node(10) + 0.8 * h;
  EXPECT_NEAR(*interpolate_local3(t, x2),
              quad_through(x2, g.node(10), t.values[10], g.node(11), t.values[11], g.node(12), t.values[12]), 1e-13);
  // midpoint right of center: tie goes toward the center (x_9)
  const double mid_r = 0.5 * (g.node(10) + g.node(11));
  EXPECT_NEAR(*interpolate_local3(t, mid_r),
              quad_through(mid_r, g.node(9), t.values[9], g.node(10), t.values[10], g.node(11), t.values[11]), 1e-13);
  // midpoint left of center: tie goes toward the center (x_7)
  const double mid_l = 0.5 * (g.node(5) + g.node(6));
  EXPECT_NEAR(*interpolate_local3(t, mid_l),
              quad_through(mid_l, g.node(5), t.values[5], g.node(6), t.values[6], g.node(7), t.values[7]), 1e-13);
}

TEST(Local3Interpolation, DivergedNeighbourGivesSentinel) {
  const auto t = solve(0.03);
  const std::size_t c = t.grid.center_index();
  std::size_t first = c;
  while (!t.diverged[first]) ++first;
  // interval just inside the first diverged node, nearer to it
  const double x = t.grid.node(first - 1) + 0.75 * t.grid.spacing();
  EXPECT_FALSE(interpolate_local3(t, x).has_value());
  EXPECT_TRUE(interpolate_local3(t, 0.0).has_value());
}

TEST(Interpolation, GlobalAndLocal3AgreeOnGroundStateTable) {
  const auto t = solve(0.0);
  const GlobalInterpolant gi(t);
  for (double x = t.grid.node(1); x <= t.grid.node(127); x += 0.00731) {
    EXPECT_NEAR(gi(x).value, *interpolate_local3(t, x), 1e-9);
  }
}
