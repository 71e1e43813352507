#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "nevgrowth/exceptional.hpp"

using namespace nevgrowth;

namespace {

// prod (1 - z/a_k), so f(0) = 1
MeromorphicFn normalized_poly(const std::vector<RootMult>& zeros) {
  Complex scale = 1.0;
  for (const RootMult& z : zeros)
    for (int k = 0; k < z.mult; ++k) scale *= -1.0 / z.at;
  return MeromorphicFn::from_factors(scale, zeros, {});
}

std::vector<RootMult> random_zeros(std::mt19937_64& rng, int n, double rmax) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RootMult> out;
  while (static_cast<int>(out.size()) < n) {
    const Complex z = std::polar(rmax * std::sqrt(u(rng)) + 1e-3, 2.0 * kPi * u(rng));
    bool ok = true;
    for (const RootMult& w : out) ok = ok && std::abs(z - w.at) > 1e-3;
    if (ok) out.push_back({z, 1});
  }
  return out;
}

std::vector<RootMult> sin_zeros(double rmax) {
  std::vector<RootMult> out;
  for (int k = -static_cast<int>(rmax / kPi); k * kPi <= rmax; ++k) out.push_back({k * kPi, 1});
  return out;
}

}  // namespace

TEST(ExclusionDisks, Examples) {
  EXPECT_TRUE(build_exclusion_disks({}, 1.0, 0.1).disks.empty());

  const std::vector<RootMult> three{{1.0, 1}, {Complex(0, 1), 1}, {-1.0, 1}};
  const auto eq = build_exclusion_disks(three, 2.0, 0.1);
  for (const Disk& d : eq.disks) EXPECT_NEAR(d.radius, 0.8 / 3.0, 1e-15);
  EXPECT_NEAR(eq.radius_sum(), 0.8, 1e-15);

  const std::vector<RootMult> mixed{{1.0, 2}, {-1.0, 1}};
  const auto du = build_exclusion_disks(mixed, 1.0, 0.01);
  ASSERT_EQ(du.disks.size(), 2u);
  EXPECT_NEAR(du.disks[0].radius, 0.04 * 2.0 / 3.0, 1e-16);
  EXPECT_NEAR(du.disks[1].radius, 0.04 / 3.0, 1e-16);
  EXPECT_THROW(build_exclusion_disks(mixed, 1.0, 5.0), DomainError);
}

TEST(ExclusionDisks, BudgetConservation) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cnt(1, 40), mult(1, 5);
  std::uniform_real_distribution<double> eta(1e-3, kEtaMax), R(0.1, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    auto zeros = random_zeros(rng, cnt(rng), 10.0);
    for (RootMult& z : zeros) z.mult = mult(rng);
    const double e = eta(rng), r = R(rng);
    const auto du = build_exclusion_disks(zeros, r, e);
    EXPECT_NEAR(du.radius_sum(), 4.0 * e * r, 1e-12 * 4.0 * e * r);
  }
}

TEST(ExclusionDisks, CartanSpendsBudgetAndCoversZeros) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto zeros = random_zeros(rng, 1 + trial % 12, 2.0);
    if (trial % 3 == 0) zeros.push_back({zeros[0].at + 1e-4, 2});  // tight cluster
    const auto du = build_cartan_disks(zeros, 1.0, 0.1);
    EXPECT_NEAR(du.radius_sum(), 0.4, 1e-12);
    for (const RootMult& z : zeros) EXPECT_TRUE(du.contains(z.at));
  }
}

TEST(Levin, Examples) {
  const auto f = normalized_poly({{1.0, 1}});
  const auto du = build_exclusion_disks(f.zeros_within(2 * kE), 1.0, 0.1);
  EXPECT_TRUE(verify_levin(f, 1.0, 0.1, du, 20000).pass);

  const auto one = MeromorphicFn::constant(1.0);
  const auto r1 = verify_levin(one, 1.0, 0.1, DiskUnion{}, 1000);
  EXPECT_TRUE(r1.pass);
  EXPECT_EQ(r1.margin, 0.0);

  EXPECT_THROW(verify_levin(MeromorphicFn::polynomial(Polynomial({2.0, -1.0})), 1.0, 0.1, DiskUnion{}, 10),
               NotNormalized);

  std::mt19937_64 rng(21);
  const auto g = normalized_poly(random_zeros(rng, 10, 2 * kE));
  const auto ex = levin_exclusion(g, 1.0, 0.05, 100000);
  EXPECT_TRUE(ex.report.pass);
  EXPECT_GT(ex.report.samples_used, 90000u);
}

TEST(Levin, UndersizedDisksAreDetected) {
  // A zero inside |z| <= R with a negligible disk: log|f| -> -inf near it.
  const auto f = normalized_poly({{0.5, 3}});
  DiskUnion tiny{{{0.5, 1e-12}}, 4.0 * 0.1, DiskRule::proportional};
  EXPECT_FALSE(verify_levin(f, 1.0, 0.1, tiny, 1000).pass);
}

TEST(Levin, RandomPolynomials) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> deg(1, 10);
  for (double eta : {0.05, 0.1, 0.5}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = normalized_poly(random_zeros(rng, deg(rng), 2 * kE * 1.5));
      const auto ex = levin_exclusion(f, 1.5, eta, 20000);
      EXPECT_TRUE(ex.report.pass) << "eta " << eta << " trial " << trial << " margin " << ex.report.margin;
    }
  }
}

TEST(Radial, Examples) {
  const auto one = radial_projection(DiskUnion{{{10.0, 0.5}}, 2.0, DiskRule::proportional});
  ASSERT_EQ(one.intervals.size(), 1u);
  EXPECT_DOUBLE_EQ(one.intervals[0].lo, 9.5);
  EXPECT_DOUBLE_EQ(one.intervals[0].hi, 10.5);
  EXPECT_EQ(one.j_lo, 1);
  EXPECT_EQ(one.j_hi, 1);

  const auto two = radial_projection(DiskUnion{{{10.0, 0.5}, {Complex(0, -10.8), 0.5}}, 2.0, DiskRule::proportional});
  ASSERT_EQ(two.intervals.size(), 1u);
  EXPECT_DOUBLE_EQ(two.intervals[0].lo, 9.5);
  EXPECT_DOUBLE_EQ(two.intervals[0].hi, 11.3);

  const auto clipped = radial_projection(DiskUnion{{{0.5, 1.0}}, 1.0, DiskRule::proportional});
  ASSERT_EQ(clipped.intervals.size(), 1u);
  EXPECT_EQ(clipped.intervals[0].lo, 1.0);
}

TEST(Radial, MatchesBruteForceMembership) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    DiskUnion du;
    for (const RootMult& z : random_zeros(rng, 20, 50.0)) du.disks.push_back({z.at, 3.0 * u(rng)});
    const auto eset = radial_projection(du);
    for (int k = 0; k < 100000; ++k) {
      const double t = 1.0 + 55.0 * (k + 0.5) / 100000;
      // circle |z| = t meets a disk iff the point on the ray through its centre does
      bool hit = false;
      for (const Disk& d : du.disks) {
        const double a = std::abs(d.center);
        const Complex p = a == 0.0 ? Complex(t, 0.0) : t * d.center / a;
        hit = hit || std::abs(p - d.center) <= d.radius;
      }
      ASSERT_EQ(eset.contains(t), hit) << "t = " << t;
    }
  }
}

TEST(LogDensity, Examples) {
  EXPECT_EQ(log_density(RadialExceptionalSet{}, 10.0), 0.0);
  RadialExceptionalSet full;
  full.intervals = {{1.0, 1e6}};
  EXPECT_DOUBLE_EQ(log_density(full, 50.0), 1.0);
  RadialExceptionalSet e;
  e.intervals = {{kE, kE * kE}};
  EXPECT_NEAR(log_density(e, std::exp(4.0)), 0.25, 1e-15);
  EXPECT_THROW(log_density(e, 1.0), DomainError);
}

TEST(LogDensity, BoundedAndContinuous) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    DiskUnion du;
    for (const RootMult& z : random_zeros(rng, 30, 100.0)) du.disks.push_back({z.at, 5.0 * u(rng)});
    const auto eset = radial_projection(du);
    double prev = log_density(eset, 1.01);
    for (int k = 1; k <= 20000; ++k) {
      const double r = 1.01 + 150.0 * k / 20000;
      const double d = log_density(eset, r);
      EXPECT_LE(d, 1.0);
      EXPECT_GE(d, 0.0);
      // |d'(r)| <= 2 / (r log r) bounds the jump between neighbouring radii
      EXPECT_LE(std::abs(d - prev), 2.0 * (150.0 / 20000) / ((r - 0.01) * std::log(r - 0.01)) + 1e-12);
      prev = d;
    }
  }
}

TEST(DensityCeiling, Examples) {
  EXPECT_NEAR(density_ceiling(density_eta_threshold()), 1.0, 1e-12);
  // mpmath: 16 * 0.004 * e^2.5 / (1 + log 2)
  EXPECT_NEAR(density_ceiling(0.004), 0.460491339700, 1e-11);
  EXPECT_NEAR(density_ceiling(0.002), 0.230245669850, 1e-11);
  EXPECT_NEAR(density_eta_threshold(), 0.008686373999145, 1e-14);
}

TEST(DensityLemma, NoZeros) {
  const auto grid = std::vector<double>{2.0, 10.0, 100.0, 1000.0};
  const auto rep = verify_density_lemma(std::span<const RootMult>{}, 0.004, grid);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max_density, 0.0);
}

TEST(DensityLemma, WholeBudgetInOneAnnulus) {
  const double eta = 0.004;
  // annulus j = 1 with its entire budget 4 eta (2e alpha^{5/2}) in one disk
  // starting at the inner edge
  const double a_lo = kAlpha, a_hi = std::pow(kAlpha, 2.5);
  const double rho = 4.0 * eta * 2.0 * kE * a_hi;
  RadialExceptionalSet e;
  e.intervals = {{a_lo, std::min(a_lo + 2.0 * rho, a_hi)}};
  std::vector<double> grid;
  for (int k = 0; k <= 2000; ++k) grid.push_back(1.5 * std::pow(1000.0 / 1.5, k / 2000.0));
  const auto rep = verify_density_lemma(e, eta, grid);
  EXPECT_TRUE(rep.pass) << rep.max_density;
  EXPECT_GT(rep.max_density, 0.3);
}

TEST(DensityLemma, SineZeros) {
  const auto zeros = sin_zeros(1000.0);
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(1.5 * std::pow(1000.0 / 1.5, k / 400.0));
  const auto eset = annular_exceptional_set(zeros, 0.004, 1000.0);
  EXPECT_EQ(eset.j_lo, 1);
  EXPECT_EQ(eset.j_hi, annulus_index_count(1000.0));
  const auto rep = verify_density_lemma(eset, 0.004, grid);
  EXPECT_TRUE(rep.pass);
  EXPECT_GT(rep.max_density, 0.0);

  std::ostringstream os;
  write_density_csv(os, rep);
  EXPECT_EQ(os.str().rfind("# schema=1\nr,density,ceiling,pass\n", 0), 0u);
}

TEST(Export, Json) {
  const auto du = build_exclusion_disks(std::vector<RootMult>{{Complex(1, 2), 1}}, 1.0, 0.1);
  const auto j = to_json(du);
  EXPECT_EQ(j["rule"], "proportional");
  EXPECT_EQ(j["disks"][0]["center"][1], 2.0);
  const auto e = to_json(radial_projection(du));
  EXPECT_EQ(e["intervals"].size(), 1u);
}
