#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pxlab/poincare.hpp"

using namespace pxlab;

TEST(GaussLegendre, ExactForPolynomials) {
  const GaussLegendre gl(3);
  EXPECT_NEAR(gl.integrate([](double x) { return std::pow(x, 5); }, 0.0, 1.0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(GaussLegendre(8).integrate([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0,
              1e-14);
}

TEST(RadialProfile, ContinuousAtShellBoundaries) {
  const double e = 1e-12;
  EXPECT_NEAR(RadialProfile::p(1.0 - e), RadialProfile::p(1.0), 1e-9);
  EXPECT_NEAR(RadialProfile::p(2.0 - e), RadialProfile::p(2.0), 1e-9);
  EXPECT_NEAR(RadialProfile::u(1.0 - e), RadialProfile::u(1.0), 1e-9);
  EXPECT_NEAR(RadialProfile::u(2.0 - e), RadialProfile::u(2.0), 1e-9);
  EXPECT_EQ(RadialProfile::du(1.5), 0.0);
}

TEST(Quotient, BoundsAndClosedForms) {
  for (double eps : {std::exp(2.0), 1e2, 1e3, 1e4, 1e6}) {
    const QuotientRow q = quotient_row(eps);
    const QuotientCheck c = check_quotient_row(q);
    EXPECT_TRUE(c.all()) << eps;
    const double L = std::log(eps);
    EXPECT_LE(q.numerator, 40.0 * std::numbers::pi * std::pow(eps, 1.5) * (eps - 1.0) / L);
    EXPECT_LE(q.numerator_inner, 4.0 * std::numbers::pi * std::pow(eps, 1.5) * (eps - 1.0) / L);
    EXPECT_LE(q.quotient, 960.0 * (eps - 1.0) / (7.0 * eps * L));
    EXPECT_LE(q.richardson, 1e-8);
    EXPECT_GE(q.denominator, q.shell_partial);
  }
}

TEST(Quotient, ShellPartialMatchesQuadrature) {
  const double eps = 50.0;
  const double quad = GaussLegendre(16).integrate(
      [&](double r) { return 4.0 * std::numbers::pi * r * r * std::pow(eps / 4.0, 2.5); }, 1.0, 2.0);
  EXPECT_NEAR(quotient_row(eps).shell_partial, quad, 1e-12 * quad);
}

TEST(Quotient, StrictlyDecreasing) {
  const auto rows = quotient_sweep({10.0, 1e2, 1e3, 1e4, 1e6});
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k].quotient, rows[k - 1].quotient);
  for (const auto& q : rows) EXPECT_LT(q.quotient, q.envelope);
  EXPECT_LT(rows.back().quotient, 0.5 * rows.front().quotient);
}

TEST(Quotient, UnitScaleIsFinite) {
  const QuotientRow q = quotient_row(1.0);
  EXPECT_GT(q.quotient, 0.0);
  EXPECT_TRUE(std::isfinite(q.quotient));
  EXPECT_TRUE(std::isnan(q.envelope));
}

TEST(Quotient, MeanZeroProjectionStillVanishes) {
  // The quotient still decays after subtracting the mean.
  const QuotientRow a = quotient_row(1e2), q = quotient_row(1e6);
  EXPECT_GT(q.projected_denominator, 0.0);
  EXPECT_GE(q.projected_quotient, q.quotient);
  EXPECT_LT(q.projected_quotient, 0.5 * a.projected_quotient);
  EXPECT_TRUE(std::isfinite(radial_mean()));
}
