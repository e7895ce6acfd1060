#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "ktraffic/experiments.hpp"

using namespace ktraffic;

namespace {

SimConfig small_config(double rho, std::size_t n = 2000) {
  SimConfig cfg;
  cfg.n_particles = n;
  cfg.rho = Density(rho);
  cfg.tau_end = 2.0;
  cfg.seed = 7;
  return cfg;
}

double histogram_variance(const HistogramGrid& grid, std::size_t slice) {
  double m1 = 0.0;
  double m2 = 0.0;
  const double h = grid.bin_width();
  for (std::size_t b = 0; b < grid.bins(); ++b) {
    const double c = grid.bin_center(b);
    m1 += grid.slices[slice].density[b] * h * c;
    m2 += grid.slices[slice].density[b] * h * c * c;
  }
  return m2 - m1 * m1;
}

}  // namespace

TEST(UniformGrid, EndpointsAndSpacing) {
  const auto g = uniform_grid(0.0, 1.0, 21);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_NEAR(g[10], 0.5, 1e-15);
  EXPECT_TRUE(uniform_grid(0.0, 1.0, 0).empty());
  EXPECT_EQ(uniform_grid(0.3, 1.0, 1), std::vector<double>{0.3});
}

TEST(SteadyState, AveragesTrailingTenPercent) {
  MomentSeries s;
  for (int k = 0; k < 20; ++k) s.samples.push_back({double(k), double(k), 0.0, 1.0});
  const MomentSample avg = steady_state(s);
  EXPECT_DOUBLE_EQ(avg.mean, 18.5);
  EXPECT_DOUBLE_EQ(avg.variance, 1.0);
  MomentSeries one;
  one.samples.push_back({0.0, 0.25, 0.0625, 0.0});
  EXPECT_EQ(steady_state(one).mean, 0.25);
  EXPECT_THROW(steady_state(MomentSeries{}), std::invalid_argument);
}

TEST(FundamentalDiagram, ZeroDensityRowKeepsInitialMean) {
  SweepSpec spec;
  spec.rho_grid = {0.0, 0.5};
  spec.tau_end = 1.0;
  spec.base = small_config(0.0);
  spec.strategies = {ControlStrategy::none(), ControlStrategy::binary_variance(0.1)};
  const auto rows = fundamental_diagram(spec, 2);
  ASSERT_EQ(rows.size(), 4u);
  const double v_init = moments(init_ensemble(spec.base)).mean;
  for (const DiagramRow& r : rows) {
    if (r.rho == 0.0) {
      EXPECT_DOUBLE_EQ(r.mean, v_init);
      EXPECT_EQ(r.flux, 0.0);
    } else {
      EXPECT_DOUBLE_EQ(r.flux, r.rho * r.mean);
    }
  }
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(), diagram_order));
  EXPECT_EQ(rows[0].strategy, ControlKind::none);
  EXPECT_EQ(rows[1].strategy, ControlKind::binary_variance);
}

TEST(FundamentalDiagram, FailingPointNamesDensity) {
  SweepSpec spec;
  spec.rho_grid = {0.1, 0.9};
  spec.tau_end = 0.1;
  spec.base = small_config(0.1);
  spec.base.scaling.dtau = 3.0 * spec.base.scaling.epsilon;  // p = 1.35 at rho = 0.9
  try {
    fundamental_diagram(spec);
    FAIL() << "expected failure";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("rho=0.9"), std::string::npos) << e.what();
  }
}

TEST(VarianceComparison, LegsMatchPairedRuns) {
  SimConfig base = small_config(0.3);
  const auto legs = variance_comparison(base, {INFINITY, 0.1, 10.0}, 2);
  ASSERT_EQ(legs.size(), 3u);
  EXPECT_EQ(legs[0].strategy.kind(), ControlKind::none);
  EXPECT_EQ(legs[1].strategy, ControlStrategy::binary_variance(0.1));
  EXPECT_EQ(legs[2].strategy, ControlStrategy::binary_variance(10.0));
  SimConfig constrained = base;
  constrained.strategy = ControlStrategy::binary_variance(0.1);
  const auto [free, ctrl] = paired_run(base, constrained);
  EXPECT_EQ(legs[0].series, free);
  EXPECT_EQ(legs[1].series, ctrl);

  EXPECT_EQ(variance_comparison(base, {}).size(), 1u);
}

TEST(VarianceComparison, DesiredFamilyFollowsBase) {
  SimConfig base = small_config(0.4, 500);
  base.strategy = ControlStrategy::desired_speed(1.0, DesiredSpeedSpec::linear_congestion());
  const auto legs = variance_comparison(base, {0.5});
  ASSERT_EQ(legs.size(), 2u);
  EXPECT_EQ(legs[1].strategy.kind(), ControlKind::desired_speed);
  EXPECT_EQ(legs[1].strategy.nu0(), 0.5);
}

TEST(DistributionEvolution, ZeroDensityFrozen) {
  const SimConfig cfg = small_config(0.0);
  const auto grid = distribution_evolution(cfg, 25, {0.0, 0.5, 2.0});
  ASSERT_EQ(grid.slices.size(), 3u);
  EXPECT_EQ(grid.slices[0].density, grid.slices[2].density);
  for (const auto& s : grid.slices) EXPECT_NEAR(integral(s), 1.0, 1e-12);
}

TEST(DistributionEvolution, DesiredSpeedConcentrates) {
  SimConfig cfg = small_config(0.6, 5000);
  cfg.strategy = ControlStrategy::desired_speed(1e-2, DesiredSpeedSpec::constant(0.5));
  const std::size_t bins = 50;
  const auto grid = distribution_evolution(cfg, bins, {0.0, 20.0});
  const HistogramSlice& last = grid.slices.back();
  const std::size_t target = 25;  // bin holding v = 0.5
  double mass = 0.0;
  for (std::size_t b = target - 3; b <= target + 3; ++b) mass += last.density[b] * grid.bin_width();
  EXPECT_GE(mass, 0.95);
}

TEST(DistributionEvolution, VarianceControlNarrowsDistribution) {
  SimConfig free = small_config(0.3, 20000);
  SimConfig ctrl = free;
  ctrl.strategy = ControlStrategy::binary_variance(0.1);
  const std::vector<double> taus{0.0, 5.0};
  const auto g_free = distribution_evolution(free, 50, taus);
  const auto g_ctrl = distribution_evolution(ctrl, 50, taus);
  EXPECT_EQ(g_free.slices[0].density, g_ctrl.slices[0].density);
  EXPECT_LT(histogram_variance(g_ctrl, 1), histogram_variance(g_free, 1));
  EXPECT_LT(histogram_variance(g_ctrl, 1), histogram_variance(g_ctrl, 0));
}

TEST(DistributionEvolution, RejectsBadGrid) {
  EXPECT_THROW(distribution_evolution(small_config(0.2), 10, {1.0, 0.5}), ConfigError);
  EXPECT_THROW(distribution_evolution(small_config(0.2), 0, {0.0}), ConfigError);
}

TEST(Relaxation, MatchesDiscreteRecursionExactly) {
  // Dirac data with p = 1: every step applies v <- v + eps/(nu0+eps) (vd - v).
  RelaxationSpec r;
  r.epsilon = 1e-2;
  r.tau_end = 2.0;
  const RelaxationReport rep = relaxation_oracle(r);
  EXPECT_TRUE(rep.monokinetic);
  const double pull = r.epsilon / (r.nu0 + r.epsilon);
  double v = r.v0;
  for (std::size_t n = 0; n < rep.measured.size(); ++n) {
    EXPECT_NEAR(rep.measured.samples[n].mean, v, 1e-12) << "step " << n;
    EXPECT_NEAR(rep.measured.samples[n].variance, 0.0, 1e-14);
    v += pull * (r.vd - v);
  }
}

TEST(Relaxation, ClosedFormWithinTwoPercent) {
  const RelaxationReport rep = relaxation_oracle(RelaxationSpec{});
  EXPECT_TRUE(rep.monokinetic);
  EXPECT_LT(rep.max_rel_error, 0.02);
  EXPECT_NEAR(rep.measured.samples.back().tau, 5.0, 2e-3);
}

TEST(Relaxation, Degenerate) {
  RelaxationSpec same;
  same.v0 = 0.4;
  same.tau_end = 0.5;
  const RelaxationReport a = relaxation_oracle(same);
  for (const auto& s : a.measured.samples) EXPECT_NEAR(s.mean, 0.4, 1e-14);
  EXPECT_LT(a.max_rel_error, 1e-14);

  RelaxationSpec frozen;
  frozen.rho = 0.0;
  frozen.tau_end = 0.2;
  const RelaxationReport b = relaxation_oracle(frozen);
  for (const auto& s : b.measured.samples) EXPECT_NEAR(s.mean, 1.0, 1e-14);
}
