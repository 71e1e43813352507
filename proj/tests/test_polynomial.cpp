#include <gtest/gtest.h>

#include <random>

#include "nevgrowth/exp_poly.hpp"
#include "nevgrowth/polynomial.hpp"

using namespace nevgrowth;

TEST(Polynomial, HornerAndDerivative) {
  const Polynomial p({1.0, 0.0, 1.0});  // z^2 + 1
  EXPECT_EQ(p(Complex(0, 1)), Complex(0, 0));
  EXPECT_EQ(p.derivative(), Polynomial({0.0, 2.0}));
  EXPECT_EQ(p.degree(), 2);
  EXPECT_EQ(Polynomial({0.0, 0.0}).degree(), -1);
}

TEST(Polynomial, OriginRootsAreExact) {
  const Polynomial p({0.0, 0.0, 2.0});
  auto roots = factor_roots(p);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(roots[0].at, Complex{});
  EXPECT_EQ(roots[0].mult, 2);
}

TEST(Polynomial, RepeatedRootsAreClustered) {
  // (z-1)^2 (z+2i)^3
  const std::vector<RootMult> truth{{1.0, 2}, {Complex(0, -2), 3}};
  const Polynomial p = Polynomial::from_roots(1.5, truth);
  auto roots = factor_roots(p);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(std::abs(roots[0].at - 1.0), 0.0, 1e-10);
  EXPECT_EQ(roots[0].mult, 2);
  EXPECT_NEAR(std::abs(roots[1].at - Complex(0, -2)), 0.0, 1e-10);
  EXPECT_EQ(roots[1].mult, 3);
}

TEST(Polynomial, RandomRootsRecovered) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RootMult> truth;
    const int d = 1 + trial % 10;
    for (int k = 0; k < d; ++k) truth.push_back({Complex(u(rng), u(rng)), 1});
    const Polynomial p = Polynomial::from_roots(Complex(0.7, -0.2), truth);
    const auto found = p.roots();
    ASSERT_EQ(static_cast<int>(found.size()), d);
    for (const RootMult& t : truth) {
      double best = 1e300;
      for (Complex z : found) best = std::min(best, std::abs(z - t.at));
      EXPECT_LT(best, 1e-9);
    }
  }
}

TEST(ExpPoly, DerivativeAndScaledEvaluation) {
  const ExpPoly e(Polynomial({0.0, 1.0}), 2.0);  // z e^{2z}
  const ExpPoly d = e.derivative();               // (1 + 2z) e^{2z}
  const Complex z(0.3, -0.4);
  EXPECT_NEAR(std::abs(d(z) - (1.0 + 2.0 * z) * std::exp(2.0 * z)), 0.0, 1e-14);
  // e^{800} overflows but its logarithm does not
  EXPECT_NEAR(ExpPoly::exp(1.0).scaled(800.0).log_abs(), 800.0, 1e-12);
}

TEST(ExpPoly, CancellingRatesMerge) {
  const Complex i(0, 1);
  const ExpPoly s = (-0.5 * i) * ExpPoly::exp(i) + (0.5 * i) * ExpPoly::exp(-i);
  const ExpPoly sq = s * s;  // sin^2 has rates {-2i, 0, 2i}
  EXPECT_EQ(sq.terms().size(), 3u);
  EXPECT_NEAR(std::abs(sq(0.7) - std::sin(0.7) * std::sin(0.7)), 0.0, 1e-15);
  EXPECT_TRUE((s - s).is_zero());
}
