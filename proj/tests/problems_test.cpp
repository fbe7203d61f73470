#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "doco/problems.hpp"
#include "oracles.hpp"

namespace doco {
namespace {

TEST(RegressionLoss, PureRegularizer) {
  const RegressionExample ex{{0.0, 0.0, 0.0}, 0.0};
  const auto f = regression_loss(ex, 1.0, 1.0);
  const Vector x{0.3, -1.2, 2.0};
  EXPECT_DOUBLE_EQ(f.value(x), squared_norm(x));
  const Vector g = f.gradient(x);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(g[k], 2.0 * x[k]);
}

TEST(RegressionLoss, ZeroAtOrigin) {
  const RegressionExample ex{{1.0, 0.0}, 0.0};
  const auto f = regression_loss(ex, 0.0, 1.0);
  const Vector x{0.0, 0.0};
  EXPECT_EQ(f.value(x), 0.0);
  EXPECT_EQ(f.gradient(x), (Vector{0.0, 0.0}));
}

TEST(RegressionLoss, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> rho_dist(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    RegressionExample ex{Vector(4), u(rng) * 3.0};
    for (double& v : ex.features) v = u(rng);
    const auto f = regression_loss(ex, rho_dist(rng), 1.0);
    Vector x(4);
    for (double& v : x) v = u(rng);
    const auto fd = oracle::finite_difference([&](const Vector& p) { return f.value(p); }, x, 1e-6);
    const Vector g = f.gradient(x);
    EXPECT_LE(distance(g, fd), 1e-5 * std::max(1.0, norm(g)));
  }
}

TEST(RegressionLoss, StrongConvexityOnSampledPairs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double radius = 0.3;
  for (double rho : {0.0, 1.0, 2.0}) {
    for (int trial = 0; trial < 1000; ++trial) {
      RegressionExample ex{Vector(4), u(rng) * 2.0};
      for (double& v : ex.features) v = u(rng);
      const auto f = regression_loss(ex, rho, radius);
      Vector x(4), y(4);
      for (double& v : x) v = u(rng) * 0.15;
      for (double& v : y) v = u(rng) * 0.15;
      Vector diff = y;
      axpy(-1.0, x, diff);
      const double lower =
          f.value(x) + dot(f.gradient(x), diff) + 0.5 * f.strong_convexity() * squared_norm(diff);
      EXPECT_GE(f.value(y), lower - 1e-9);
    }
  }
}

TEST(RegressionLoss, BoundsAreAttainedSups) {
  const RegressionExample ex{{0.6, -0.8}, 1.5};  // ||a|| = 1
  const double radius = 0.5;
  const auto f = regression_loss(ex, 0.0, radius);
  EXPECT_DOUBLE_EQ(f.gradient_bound(), (1.0 * radius + 1.5) * 1.0);
  EXPECT_DOUBLE_EQ(f.value_bound(), 0.5 * 2.0 * 2.0);
  // Attained at x = -R a/||a||.
  const Vector x{-0.3, 0.4};
  EXPECT_NEAR(norm(f.gradient(x)), f.gradient_bound(), 1e-12);
  EXPECT_NEAR(f.value(x), f.value_bound(), 1e-12);
}

class BoxFixture : public ::testing::Test {
 protected:
  BoxConstraintSet box{-0.15, 0.15, 4};
};

TEST_F(BoxFixture, FeasibleOriginHasZeroSubgradients) {
  const Vector x(4, 0.0);
  for (std::size_t s = 0; s < box.count(); ++s) {
    EXPECT_EQ(clipped_subgradient(box, x, s), Vector(4, 0.0));
  }
}

TEST_F(BoxFixture, ViolatedLowerBound) {
  const Vector x{-0.2, 0.0, 0.0, 0.0};
  EXPECT_NEAR(box.value(0, x), 0.05, 1e-15);
  EXPECT_EQ(clipped_subgradient(box, x, 0), (Vector{-1.0, 0.0, 0.0, 0.0}));
}

TEST_F(BoxFixture, BoundaryTieGivesZero) {
  const Vector x{0.15, 0.0, 0.0, 0.0};
  EXPECT_EQ(box.value(4, x), 0.0);
  EXPECT_EQ(clipped_subgradient(box, x, 4), Vector(4, 0.0));
}

TEST_F(BoxFixture, IndexOutOfRange) {
  EXPECT_THROW(clipped_subgradient(box, Vector(4, 0.0), 8), std::out_of_range);
}

TEST_F(BoxFixture, SubgradientVanishesExactlyOnSatisfiedSet) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 500; ++trial) {
    Vector x(4);
    for (double& v : x) v = u(rng);
    for (std::size_t s = 0; s < box.count(); ++s) {
      const bool zero = clipped_subgradient(box, x, s) == Vector(4, 0.0);
      EXPECT_EQ(zero, box.value(s, x) <= 0.0);
    }
  }
}

TEST_F(BoxFixture, BoxFitsInBallOfRadiusUSqrtD) {
  const double radius = 0.15 * std::sqrt(4.0);
  EXPECT_DOUBLE_EQ(radius, 0.3);
  for (unsigned mask = 0; mask < 16; ++mask) {
    Vector v(4);
    for (std::size_t k = 0; k < 4; ++k) v[k] = (mask >> k) & 1u ? 0.15 : -0.15;
    EXPECT_LE(norm(v), radius + 1e-15);
  }
  EXPECT_NEAR(box.enclosing_radius(), radius, 1e-15);
}

TEST(BoxConstraints, RejectsEmptyBox) {
  EXPECT_THROW(BoxConstraintSet(0.1, 0.1, 2), ConfigError);
}

TEST(FunctionConstraints, Halfspace) {
  // x_0 + x_1 <= 1
  FunctionConstraintSet cs(2,
                           {{[](std::span<const double> x) { return x[0] + x[1] - 1.0; },
                             [](std::span<const double>) { return Vector{1.0, 1.0}; }}},
                           std::sqrt(2.0));
  EXPECT_EQ(clipped_subgradient(cs, Vector{1.0, 1.0}, 0), (Vector{1.0, 1.0}));
  EXPECT_EQ(clipped_subgradient(cs, Vector{0.2, 0.2}, 0), (Vector{0.0, 0.0}));
}

TEST(SyntheticStream, GroundTruth) {
  EXPECT_EQ(synthetic_ground_truth(4), (Vector{1.0, 1.0, 0.0, 0.0}));
  EXPECT_EQ(synthetic_ground_truth(5), (Vector{1.0, 1.0, 0.0, 0.0, 0.0}));
}

TEST(SyntheticStream, DeterministicPerSeed) {
  const auto a = synthetic_stream(3, 4, 50, 0.0, 42, 0.3);
  const auto b = synthetic_stream(3, 4, 50, 0.0, 42, 0.3);
  const auto c = synthetic_stream(3, 4, 50, 0.0, 43, 0.3);
  bool differs = false;
  for (std::size_t t = 1; t <= 50; ++t) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(a.example(i, t).features, b.example(i, t).features);
      EXPECT_EQ(a.example(i, t).target, b.example(i, t).target);
      differs |= a.example(i, t).target != c.example(i, t).target;
    }
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.loss_gradient_bound(), b.loss_gradient_bound());
}

TEST(SyntheticStream, FeatureMeanNearZero) {
  const auto s = synthetic_stream(1, 4, 25000, 0.0, 1, 0.3);
  double sum = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t t = 1; t <= 25000; ++t) {
    for (double v : s.example(0, t).features) {
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  EXPECT_LE(std::abs(sum / 1e5), 0.01);
  EXPECT_GE(lo, -1.0);
  EXPECT_LE(hi, 1.0);
}

TEST(SyntheticStream, AggregateBoundsCoverEveryOracle) {
  const auto s = synthetic_stream(6, 4, 200, 1.0, 8, 0.3);
  for (std::size_t t = 1; t <= 200; ++t) {
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_LE(s.oracle(i, t).gradient_bound(), s.loss_gradient_bound());
      EXPECT_LE(s.oracle(i, t).value_bound(), s.value_bound());
    }
  }
  EXPECT_EQ(s.strong_convexity(), 2.0);
  EXPECT_TRUE(validate_loss_assumptions(s, 2000, 3).ok);
  const BoxConstraintSet box(-0.15, 0.15, 4);
  EXPECT_EQ(s.gradient_bound(box), std::max(1.0, s.loss_gradient_bound()));
}

TEST(LossStream, RejectsBadSlots) {
  const auto s = synthetic_stream(2, 4, 3, 0.0, 1, 0.3);
  EXPECT_THROW(s.example(2, 1), std::out_of_range);
  EXPECT_THROW(s.example(0, 0), std::out_of_range);
  EXPECT_THROW(s.example(0, 4), std::out_of_range);
  EXPECT_THROW(synthetic_stream(0, 4, 3, 0.0, 1, 0.3), ConfigError);
}

}  // namespace
}  // namespace doco
