#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ricci_bound/error.hpp"
#include "ricci_bound/jump_process.hpp"

using namespace ricci;

TEST(Simulate, FastDriftKillsMean) {
  JumpProcessConfig c;
  c.drift_alpha = 50.0;
  c.horizon_T = 1.0;
  c.n_paths = 200000;
  const auto s = simulate_paths(c);
  const auto m = sample_moments(s);
  EXPECT_LE(m.mean, 0.05);
  EXPECT_NEAR(m.mean, (1.0 - std::exp(-50.0)) / 50.0, 4 * m.standard_error);
}

TEST(Simulate, StationaryMean) {
  JumpProcessConfig c;
  c.drift_alpha = 1.0;
  c.horizon_T = 20.0;
  c.n_paths = 200000;
  const auto m = sample_moments(simulate_paths(c));
  EXPECT_NEAR(m.mean, 1.0, 3 * m.standard_error);
  // cumulant kappa_2 = 1/(2 alpha)
  EXPECT_NEAR(m.variance, 0.5, 0.01);
}

TEST(Simulate, NoJumpPathIsZero) {
  JumpProcessConfig c;
  c.drift_alpha = 50.0;
  c.horizon_T = 1.0;
  c.n_paths = 100000;
  const auto s = simulate_paths(c);
  std::size_t zeros = 0;
  for (double x : s) {
    EXPECT_GE(x, 0.0);
    if (x == 0.0) ++zeros;
  }
  // P(N(1) = 0) = e^{-1}
  EXPECT_NEAR(static_cast<double>(zeros) / 100000.0, std::exp(-1.0), 0.01);
}

TEST(Simulate, DeterministicForSeed) {
  JumpProcessConfig c;
  c.n_paths = 10000;
  c.seed = 42;
  EXPECT_EQ(simulate_paths(c), simulate_paths(c));
  auto d = c;
  d.seed = 43;
  EXPECT_NE(simulate_paths(c), simulate_paths(d));
}

TEST(Simulate, ShortHorizonRejected) {
  JumpProcessConfig c;
  c.horizon_T = 5.0;
  EXPECT_THROW(simulate_paths(c), DomainError);
}

TEST(TransformI, Zero) { EXPECT_EQ(transform_I(0.0), 0.0); }

TEST(TransformI, OneSeriesAgainstQuadrature) {
  EXPECT_NEAR(transform_I(1.0), transform_I_quadrature(1.0), 1e-9);
  EXPECT_NEAR(transform_I(1.0), 1.3179022, 1e-7);
}

TEST(TransformI, AgreesOverRange) {
  for (double l : {-20.0, -3.0, -0.5, 0.25, 2.0, 7.0, 15.0, 30.0}) {
    EXPECT_NEAR(transform_I(l), transform_I_quadrature(l), 1e-10 * std::max(1.0, std::abs(transform_I(l)))) << l;
  }
}

TEST(TransformI, Asymptotics) {
  const double l = 30.0;
  EXPECT_NEAR(transform_I(l) / (std::exp(l) / l), 1.0, 0.05);
}

TEST(TransformI, RejectsLargeArgument) { EXPECT_THROW(transform_I(60.0), DomainError); }

TEST(LaplaceG, Normalized) { EXPECT_EQ(stationary_laplace_G(0.0, 0.7), 1.0); }

TEST(LaplaceG, DerivativeAtZeroIsMean) {
  for (double a : {0.5, 1.0, 2.0}) {
    const double h = 1e-5;
    const double d = (stationary_laplace_G(h, a) - stationary_laplace_G(-h, a)) / (2 * h);
    EXPECT_NEAR(d, 1.0 / a, 1e-8);
  }
}

TEST(LaplaceG, FiniteHorizonConverges) {
  const double a = 1.0;
  const double gt = laplace_G_T(1.0, a, 20.0);
  const double g = stationary_laplace_G(1.0, a);
  EXPECT_LE(std::abs(gt - g) / g, 1e-6);
}

TEST(LaplaceG, OverflowGuarded) {
  EXPECT_TRUE(std::isinf(stationary_laplace_G(50.0, 0.01)));
  EXPECT_TRUE(std::isfinite(log_stationary_laplace_G(50.0, 0.01)));
}

TEST(Poissonian, BelowOneAtTen) { EXPECT_LT(poissonian_tail_bound(10.0, 1.0), 1.0); }

TEST(Poissonian, DecreasingOnGrid) {
  double prev = poissonian_tail_bound(2.0, 1.0);
  for (double l = 2.5; l <= 50.0; l += 0.5) {
    const double b = poissonian_tail_bound(l, 1.0);
    EXPECT_LT(b, prev) << l;
    prev = b;
  }
}

TEST(Poissonian, FastDriftLimit) {
  const double l = 6.0;
  EXPECT_NEAR(log_poissonian_tail_bound(l, 1e9), -l * std::log(l), 1e-7);
}

TEST(Poissonian, RejectsSmallLevels) { EXPECT_THROW(poissonian_tail_bound(1.0, 1.0), DomainError); }

TEST(Poissonian, DominatesExactTail) {
  const DickmanLaw law(1.0);
  for (double l = 1.5; l <= 20.0; l += 0.5) EXPECT_GE(poissonian_tail_bound(l, 1.0), law.tail(l)) << l;
}

TEST(ClopperPearson, ZeroSuccesses) {
  const auto [lo, hi] = clopper_pearson(0, 1000000, 0.99);
  EXPECT_EQ(lo, 0.0);
  // 1 - (0.005)^{1/n}
  EXPECT_NEAR(hi, -std::expm1(std::log(0.005) / 1e6), 1e-12);
}

TEST(ClopperPearson, BracketsEstimate) {
  const auto [lo, hi] = clopper_pearson(30, 1000, 0.99);
  EXPECT_LT(lo, 0.03);
  EXPECT_GT(hi, 0.03);
}

// Dickman's function rho(u) = e^{gamma} f(u) for alpha = 1; reference values
// from the classical tables.
TEST(Dickman, MatchesTabulatedRho) {
  const DickmanLaw law(1.0);
  const double eg = std::exp(std::numbers::egamma);
  const std::vector<std::pair<double, double>> table{
      {1.0, 1.0},
      {2.0, 1.0 - std::numbers::ln2},
      {3.0, 4.8608388291131e-2},
      {4.0, 4.9109256477602e-3},
      {5.0, 3.5472470045597e-4},
      {6.0, 1.9649696353955e-5},
      {10.0, 2.7701718377259e-11},
  };
  for (auto [u, rho] : table) EXPECT_NEAR(eg * law.density(u) / rho, 1.0, 1e-9) << u;
}

TEST(Dickman, TotalMassAndMoments) {
  for (double a : {0.5, 1.0, 2.0}) {
    const DickmanLaw law(a);
    EXPECT_NEAR(law.tail(0.0), 1.0, 1e-10) << a;
    // E X = int_0^inf P(X >= l) dl; E X^2 = int 2 l P(X >= l) dl
    double m1 = 0.0;
    double m2 = 0.0;
    const double h = 1e-3;
    for (double l = 0.5 * h; l < 30.0; l += h) {
      const double t = law.tail(l);
      m1 += t * h;
      m2 += 2 * l * t * h;
    }
    EXPECT_NEAR(m1, 1.0 / a, 1e-5) << a;
    EXPECT_NEAR(m2 - m1 * m1, 1.0 / (2 * a), 1e-5) << a;
  }
}

TEST(Witness, ExactTailsAreSubGaussianInShape) {
  const DickmanLaw law(1.0);
  std::vector<double> levels;
  std::vector<double> tails;
  for (double l = 3.0; l <= 8.0; l += 1.0) {
    levels.push_back(l);
    tails.push_back(law.tail(l));
  }
  const auto w = non_gaussianity_statistics(levels, tails);
  ASSERT_TRUE(w.defined);
  // (-ln tail)/(l ln l) is nearly flat while (-ln tail)/l^2 keeps falling
  EXPECT_LT(w.poissonian_variation, 0.25);
  EXPECT_LT(w.quadratic_drift, 0.0);
}

TEST(Witness, UndefinedWithEmptyTail) {
  const auto w = non_gaussianity_statistics({3.0, 4.0}, {0.01, 0.0});
  EXPECT_FALSE(w.defined);
}
