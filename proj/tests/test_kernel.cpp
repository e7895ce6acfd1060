#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ktraffic/kernel.hpp"

using namespace ktraffic;

namespace {

KernelParams params(double gamma, double delta_v) { return {gamma, delta_v}; }

}  // namespace

TEST(AccelerationProbability, Examples) {
  EXPECT_DOUBLE_EQ(acceleration_probability(Density(0.0), 1.0), 1.0);
  EXPECT_DOUBLE_EQ(acceleration_probability(Density(1.0), 2.5), 0.0);
  EXPECT_DOUBLE_EQ(acceleration_probability(Density(0.3), 1.0), 0.7);
}

TEST(AccelerationProbability, MonotoneNonIncreasing) {
  for (double gamma : {0.25, 0.5, 1.0, 2.0, 7.0}) {
    double previous = 1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double p = acceleration_probability(Density(k / 1000.0), gamma);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      EXPECT_LE(p, previous);
      previous = p;
    }
  }
}

TEST(AccelerationProbability, DomainErrors) {
  EXPECT_THROW(Density(1.2), DomainError);
  EXPECT_THROW(Density(-0.1), DomainError);
  EXPECT_THROW(Density(std::nan("")), DomainError);
  EXPECT_THROW(acceleration_probability(Density(0.5), 0.0), DomainError);
  EXPECT_THROW(acceleration_probability(Density(0.5), -1.0), DomainError);
}

TEST(InteractionFunction, EqualSpeedsGiveZero) {
  for (double rho : {0.0, 0.4, 1.0}) {
    EXPECT_EQ(interaction_function(UnitSpeed(0.5), UnitSpeed(0.5), Density(rho), params(3.0, 0.7)),
              0.0);
  }
}

TEST(InteractionFunction, AccelerationBranch) {
  // P = 1, min{0.2 + 0.3, 1} - 0.2
  EXPECT_NEAR(interaction_function(UnitSpeed(0.2), UnitSpeed(0.6), Density(0.0), params(1.0, 0.3)),
              0.3, 1e-15);
}

TEST(InteractionFunction, BrakingBranchHandEvaluated) {
  // Hand evaluation: P = 1 - 0.5 = 0.5, (1 - P) (P w - v) = 0.5 (0.2 - 0.9).
  const double p = 1.0 - 0.5;
  const double expected = (1.0 - p) * (p * 0.4 - 0.9);
  EXPECT_DOUBLE_EQ(expected, -0.35);
  for (double dv : {0.05, 0.2, 0.9}) {
    EXPECT_NEAR(
        interaction_function(UnitSpeed(0.9), UnitSpeed(0.4), Density(0.5), params(1.0, dv)),
        -0.35, 1e-15);
  }
}

TEST(InteractionFunction, RangeAndSignCoherence) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200000; ++k) {
    const double v = unit(gen);
    const double w = unit(gen);
    const double rho = unit(gen);
    const KernelParams kp = params(0.1 + 3.0 * unit(gen), 0.01 + unit(gen));
    const double i = interaction_function(UnitSpeed(v), UnitSpeed(w), Density(rho), kp);
    ASSERT_GE(i, -1.0);
    ASSERT_LE(i, 1.0);
    if (v < w) {
      ASSERT_GE(i, 0.0);
    }
    const double p = acceleration_probability(Density(rho), kp.gamma);
    if (v > w && p * w <= v) {
      ASSERT_LE(i, 0.0);
    }
  }
}

TEST(UnconstrainedUpdate, Examples) {
  EXPECT_NEAR(
      unconstrained_update(UnitSpeed(0.9), UnitSpeed(0.4), 1.0, Density(0.5), params(1.0, 0.2))
          .value(),
      0.55, 1e-15);
  // min{1.15, 1} - 0.95 = 0.05: lands exactly on the upper bound.
  EXPECT_EQ(
      unconstrained_update(UnitSpeed(0.95), UnitSpeed(1.0), 1.0, Density(0.0), params(1.0, 0.2))
          .value(),
      1.0);
  for (double dt : {0.01, 0.5, 1.0}) {
    EXPECT_EQ(
        unconstrained_update(UnitSpeed(0.3), UnitSpeed(0.3), dt, Density(0.7), params(1.0, 0.2))
            .value(),
        0.3);
  }
}

TEST(UnconstrainedUpdate, TimeStepDomain) {
  const KernelParams kp;
  EXPECT_THROW(unconstrained_update(UnitSpeed(0.5), UnitSpeed(0.6), 0.0, Density(0.5), kp),
               DomainError);
  EXPECT_THROW(unconstrained_update(UnitSpeed(0.5), UnitSpeed(0.6), 1.5, Density(0.5), kp),
               DomainError);
  EXPECT_THROW(unconstrained_update(UnitSpeed(0.5), UnitSpeed(0.6), 0.5, Density(0.5), {1.0, 0.0}),
               DomainError);
}

TEST(UnconstrainedUpdate, BoundPreservationRandomAndGrid) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200000; ++k) {
    const double dt = 1.0 - unit(gen);  // (0,1]
    const KernelParams kp = params(std::exp(4.0 * unit(gen) - 2.0), 0.001 + 2.0 * unit(gen));
    ASSERT_NO_THROW(
        unconstrained_update(UnitSpeed(unit(gen)), UnitSpeed(unit(gen)), dt, Density(unit(gen)), kp));
  }
  const double grid[] = {0.0, 1e-12, 0.25, 0.5, 1.0 - 1e-12, 1.0};
  for (double v : grid)
    for (double w : grid)
      for (double rho : grid)
        for (double dt : {1e-9, 0.5, 1.0})
          for (double dv : {1e-6, 0.2, 5.0}) {
            const double out =
                unconstrained_update(UnitSpeed(v), UnitSpeed(w), dt, Density(rho), params(1.0, dv))
                    .value();
            ASSERT_GE(out, 0.0);
            ASSERT_LE(out, 1.0);
          }
}

TEST(SaturateUnit, AbsorbsRoundOffOnly) {
  EXPECT_EQ(saturate_unit(1.0 + 1e-13), 1.0);
  EXPECT_EQ(saturate_unit(-1e-13), 0.0);
  EXPECT_THROW(saturate_unit(1.0 + 1e-9), BoundViolation);
  EXPECT_THROW(saturate_unit(-1e-9), BoundViolation);
  EXPECT_THROW(saturate_unit(std::nan("")), BoundViolation);
}
