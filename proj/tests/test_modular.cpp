#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pxlab/embedding.hpp"

using namespace pxlab;

namespace {

GridFunction random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double amp = std::exp(std::uniform_real_distribution<double>(-4.0, 4.0)(rng));
  GridFunction f(g);
  for (auto& v : f.values()) v = amp * n(rng);
  return f;
}

ExponentField random_exponent(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lo(1.1, 3.0), w(0.0, 2.0);
  const double a = lo(rng), b = w(rng);
  return ExponentField(
      g, GridFunction::sample(g, [&](double x, double y) { return a + b * std::sin(3.0 * x + y) * std::sin(3.0 * x + y); })
             .values());
}

}  // namespace

TEST(Modular, ClosedForms) {
  const Grid g = Grid::line(1000);
  EXPECT_NEAR(modular(GridFunction(g, 2.0), ExponentField::constant(g, 3.0)), 8.0, 1e-12);
  // int_0^1 2^(1+x) dx = 2/ln 2, midpoint rule error O(h^2).
  EXPECT_NEAR(modular(GridFunction(g, 2.0), build_field("affine:1+1x", g)), 2.0 / std::log(2.0), 1e-6);
  EXPECT_EQ(modular(GridFunction(g), build_field("affine:1+1x", g)), 0.0);
}

TEST(Luxemburg, ConstantExponentIsPowerOfModular) {
  std::mt19937_64 rng(1);
  for (double p : {1.1, 1.5, 2.0, 3.7, 6.0}) {
    const Grid g = Grid::square(9, 7);
    const GridFunction f = random_field(g, rng);
    const ExponentField q = ExponentField::constant(g, p);
    const double expected = std::pow(modular(f, q), 1.0 / p);
    EXPECT_NEAR(luxemburg_norm(f, q).value, expected, 1e-10 * expected);
  }
}

TEST(Luxemburg, MatchesBisectionOracle) {
  const Grid g = Grid::line(64);
  const GridFunction f(g, 3.0);
  const ExponentField q = build_field("affine:1+1x", g);
  auto rho = [&](double lam) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) s += std::pow(3.0 / lam, q[k]) * g.cell_volume();
    return s;
  };
  double lo = 1.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rho(mid) > 1.0 ? lo : hi) = mid;
  }
  const NormResult n = luxemburg_norm(f, q);
  EXPECT_NEAR(n.value, lo, 1e-11 * lo);
  EXPECT_LE(n.residual, 1e-10);
  EXPECT_NEAR(luxemburg_norm(GridFunction(g, 2.0), q).value, 2.0, 1e-12);
}

TEST(Luxemburg, Homogeneous) {
  std::mt19937_64 rng(2);
  const Grid g = Grid::square(8, 8);
  const ExponentField q = random_exponent(g, rng);
  const GridFunction f = random_field(g, rng);
  const double n = luxemburg_norm(f, q).value;
  for (double c : {-3.0, 0.01, 250.0}) EXPECT_NEAR(luxemburg_norm(c * f, q).value, std::abs(c) * n, 1e-10 * std::abs(c) * n);
  EXPECT_EQ(luxemburg_norm(GridFunction(g), q).value, 0.0);
}

TEST(Luxemburg, UnitBallRelationsAndHolderOnRandomSamples) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Grid g = i % 2 ? Grid::square(6, 5) : Grid::line(24);
    const ExponentField q = random_exponent(g, rng);
    const GridFunction f = random_field(g, rng), h = random_field(g, rng);
    const UnitBallReport rep = check_unit_ball_relations(f, q);
    EXPECT_TRUE(rep.all()) << "sample " << i << " violation " << rep.worst_violation;
    EXPECT_TRUE(check_holder(f, h, q).holds) << "sample " << i;
  }
}

TEST(Theta, InterpolationExponent) {
  EXPECT_DOUBLE_EQ(gn_theta(2.0, 4.0, 2).theta, 0.5);
  EXPECT_NEAR(gn_theta(1.8, 4.0, 2).theta, 0.5625, 1e-15);
  EXPECT_EQ(gn_theta(2.5, 2.0, 2).theta, 0.0);
  EXPECT_FALSE(gn_theta(2.5, 2.0, 2).in_unit_interval);
  EXPECT_TRUE(gn_theta(1.8, 4.0, 2).in_unit_interval);
}

TEST(Embedding, MonotoneInTrials) {
  const Grid g = Grid::square(12, 12);
  const ExponentField p = build_field("affine:1.8+0.35x+0.35y", g), r = ExponentField::constant(g, 4.0);
  for (EmbeddingKind kind : {EmbeddingKind::B0, EmbeddingKind::B, EmbeddingKind::Ctilde}) {
    double prev = 0.0;
    for (std::size_t trials : {1, 3, 6}) {
      const auto e = estimate_embedding(p, kind == EmbeddingKind::B0 ? std::nullopt : std::optional(r), trials, 7,
                                        kind, {3, 4});
      EXPECT_GE(e.constant, prev);
      EXPECT_GT(e.constant, 0.0);
      prev = e.constant;
    }
  }
  EXPECT_THROW(estimate_embedding(p, std::nullopt, 2, 1, EmbeddingKind::B), error);
}
