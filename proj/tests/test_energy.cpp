#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "pxlab/energy.hpp"

using namespace pxlab;

namespace {

const Grid kSmall = Grid::square(12, 12);

ExponentField affine_p(const Grid& g) { return build_field("affine:1.8+0.35x+0.35y", g); }

// Independent J for a 1D grid from face differences.
double direct_energy_1d(const GridFunction& u, double p, double r) {
  const Grid& g = u.grid();
  const int n = g.nx();
  const double h = g.spacing(0);
  std::vector<double> face(n + 1, 0.0);
  for (int i = 1; i < n; ++i) face[i] = (u[i] - u[i - 1]) / h;
  double J = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = 0.5 * (face[i] * face[i] + face[i + 1] * face[i + 1]);
    J += (std::pow(m, 0.5 * p) / p - std::pow(std::abs(u[i]), r) / r) * h;
  }
  return J;
}

// Smallest nonzero eigenvalue of the discrete Neumann Laplacian.
double neumann_lambda1(const Grid& g) {
  const int nx = g.nx(), ny = g.ny();
  const std::size_t n = g.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  auto link = [&](std::size_t a, std::size_t b, double w) {
    A(a, a) += w;
    A(b, b) += w;
    A(a, b) -= w;
    A(b, a) -= w;
  };
  const double hx = g.spacing(0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) link(g.index(i, j), g.index(i + 1, j), 1.0 / (hx * hx));
  if (g.dimension == 2) {
    const double hy = g.spacing(1);
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i < nx; ++i) link(g.index(i, j), g.index(i, j + 1), 1.0 / (hy * hy));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  return es.eigenvalues()(1);
}

}  // namespace

TEST(Energy, ZeroFunction) {
  const Grid g = kSmall;
  const EnergySnapshot s = snapshot(GridFunction(g), affine_p(g), ExponentField::constant(g, 4.0));
  EXPECT_EQ(s.J, 0.0);
  EXPECT_EQ(s.I, 0.0);
  EXPECT_EQ(s.delta0, kUndefinedRatio);
}

TEST(Energy, MatchesDirectSum) {
  const Grid g = Grid::line(40);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  GridFunction u(g);
  for (auto& v : u.values()) v = n(rng);
  const EnergySnapshot s = snapshot(u, ExponentField::constant(g, 2.3), ExponentField::constant(g, 3.5));
  const double J = direct_energy_1d(u, 2.3, 3.5);
  EXPECT_NEAR(s.J, J, 1e-12 * std::abs(J));
  EXPECT_NEAR(s.I, s.grad_modular - s.source_modular, 1e-12 * s.grad_modular);
}

TEST(Energy, RayProfileConstantExponents) {
  const Grid g = kSmall;
  const GridFunction u = GridFunction::sample(g, [](double x, double y) { return std::cos(std::numbers::pi * x) * (1.0 + y); });
  const ExponentField p = ExponentField::constant(g, 2.0), r = ExponentField::constant(g, 4.0);
  const EnergySnapshot s = snapshot(u, p, r);
  const auto prof = ray_profile(u, p, r, {0.25, 1.0, 3.0});
  for (const auto& pt : prof) {
    const double l = pt.lambda;
    EXPECT_NEAR(pt.J, l * l * s.grad_modular / 2.0 - std::pow(l, 4) * s.source_modular / 4.0, 1e-12);
    EXPECT_NEAR(pt.I, l * l * s.grad_modular - std::pow(l, 4) * s.source_modular, 1e-11);
  }
  EXPECT_THROW(ray_profile(u, p, r, {0.0}), error);
}

TEST(Energy, RayModularBoundsForVariableExponents) {
  const Grid g = kSmall;
  const ExponentField p = affine_p(g), r = build_field("affine:3.5+0.5x", g);
  const GridFunction u = GridFunction::sample(g, [](double x, double y) { return std::cos(std::numbers::pi * x) + 0.3 * std::cos(std::numbers::pi * y); });
  const EnergySnapshot s = snapshot(u, p, r);
  for (const auto& pt : ray_profile(u, p, r, {0.1, 0.7, 1.5, 8.0})) {
    const double l = pt.lambda;
    const double lo = std::min(std::pow(l, p.p_minus()), std::pow(l, p.p_plus())) * s.grad_modular -
                      std::max(std::pow(l, r.p_minus()), std::pow(l, r.p_plus())) * s.source_modular;
    EXPECT_GE(pt.I, lo - 1e-12 * (1.0 + std::abs(lo)));
  }
}

TEST(Energy, LambdaStarConstantExponents) {
  const Grid g = kSmall;
  const GridFunction u = GridFunction::sample(g, [](double x, double) { return 0.4 * std::cos(std::numbers::pi * x); });
  const ExponentField p = ExponentField::constant(g, 2.0), r = ExponentField::constant(g, 4.0);
  const EnergySnapshot s = snapshot(u, p, r);
  const LambdaStar ls = find_lambda_star(u, p, r);
  EXPECT_NEAR(ls.lambda, std::sqrt(s.grad_modular / s.source_modular), 1e-10 * ls.lambda);
  const NehariPoint np = nehari_project(u, p, r);
  ASSERT_TRUE(np.ok);
  EXPECT_NEAR(find_lambda_star(np.u, p, r).lambda, 1.0, 1e-10);
  // Constant source: rescale so that both modulars coincide.
  const double c = 1.0 / std::sqrt(2.0);
  const GridFunction w = c * np.u;
  EXPECT_NEAR(find_lambda_star(w, p, r).lambda, std::sqrt(2.0), 1e-10);
  EXPECT_THROW(find_lambda_star(GridFunction(g), p, r), error);
  EXPECT_THROW(find_lambda_star(u, ExponentField::constant(g, 4.0), ExponentField::constant(g, 3.0)), error);
}

TEST(Energy, FlowRateIsNegativeEnergyGradient) {
  const Grid g = Grid::square(10, 8);
  const ExponentField p = affine_p(g), r = ExponentField::constant(g, 4.0);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  GridFunction u(g), v(g);
  for (auto& x : u.values()) x = n(rng);
  for (auto& x : v.values()) x = n(rng);
  u = project_mean_zero(u);
  v = project_mean_zero(v);
  const double delta = 1e-3, eps = 1e-6;
  GridFunction up = u, um = u;
  up += eps * v;
  um += (-eps) * v;
  const double dE = (regularised_energy(up, p, r, delta) - regularised_energy(um, p, r, delta)) / (2.0 * eps);
  const double rate = inner(flow_rate(u, p, r, delta), v);
  EXPECT_NEAR(dE, -rate, 1e-6 * (1.0 + std::abs(rate)));
  EXPECT_NEAR(mean(flow_rate(u, p, r, delta)), 0.0, 1e-12);
}

TEST(Depth, LowerFormula) {
  EXPECT_DOUBLE_EQ(depth_lower_formula(1.0, 2.0, 2.0, 4.0, 4.0), 0.25);
  EXPECT_NEAR(depth_lower_formula(0.5, 2.0, 2.0, 4.0, 4.0), 0.25 * std::pow(0.5, -4.0), 1e-12);
}

TEST(Depth, MonotoneInTrials) {
  const Grid g = kSmall;
  const ExponentField p = affine_p(g), r = ExponentField::constant(g, 4.0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t trials : {1, 2, 4}) {
    const DepthEstimate d = estimate_depth(p, r, trials, 5, std::nullopt, {3, 20});
    EXPECT_LE(d.upper, prev);
    EXPECT_GT(d.upper, 0.0);
    prev = d.upper;
    const EnergySnapshot s = snapshot(d.best_field, p, r);
    EXPECT_NEAR(s.J, d.upper, 1e-12 * d.upper);
    EXPECT_LE(std::abs(s.I), 1e-10 * s.grad_modular);
  }
  EXPECT_THROW(estimate_depth(p, ExponentField::constant(g, 2.0), 1, 1), error);
}

TEST(Nehari, EnergyBoundsOnManifold) {
  const Grid g = kSmall;
  const ExponentField p = affine_p(g), r = build_field("affine:3.5+0.5y", g);
  const double c = (r.p_minus() - p.p_plus()) / (p.p_plus() * r.p_minus());
  WitnessSource src(g, 21, 4);
  for (std::size_t i = 0; i < 30; ++i) {
    const GridFunction w = src.field(src.make(i));
    const NehariPoint np = nehari_project(w, p, r);
    if (!np.ok) continue;
    EXPECT_LE(std::abs(np.point.I), 1e-10 * np.point.grad_modular);
    EXPECT_GE(np.point.J, c * np.point.grad_modular * (1.0 - 1e-10));
    // Points on the positive side of the ray stay below the gradient cap.
    const GridFunction inside = 0.8 * np.u;
    const EnergySnapshot s = snapshot(inside, p, r);
    ASSERT_GT(s.I, 0.0);
    EXPECT_LT(s.grad_modular, s.J / c);
  }
}

TEST(Nehari, LevelRadiiNested) {
  const Grid g = kSmall;
  const ExponentField p = affine_p(g), r = ExponentField::constant(g, 4.0);
  const auto sample = sample_nehari(p, r, 4, 3, {3, 15});
  ASSERT_FALSE(sample.empty());
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& x : sample) lo = std::min(lo, x.J);
  const LevelRadii a = level_radii_from(lo * 1.5, sample), b = level_radii_from(lo * 10.0, sample);
  EXPECT_LE(a.lambda_s, a.Lambda_s);
  EXPECT_LE(b.lambda_s, a.lambda_s);
  EXPECT_GE(b.Lambda_s, a.Lambda_s);
  EXPECT_GE(b.admitted, a.admitted);
  EXPECT_THROW(level_radii_from(lo * 0.5, sample), error);
}

TEST(Embedding, QuadraticConstantApproachesSpectralOracle) {
  for (const Grid& g : {Grid::line(32), Grid::square(10, 10)}) {
    const double oracle = 1.0 / std::sqrt(neumann_lambda1(g));
    const EmbeddingEstimate e =
        estimate_embedding(ExponentField::constant(g, 2.0), std::nullopt, 12, 1, EmbeddingKind::B0, {3, 300});
    EXPECT_LE(e.constant, oracle * (1.0 + 1e-9));
    EXPECT_GE(e.constant, 0.97 * oracle);
  }
  // On the line the oracle tends to 1/pi.
  EXPECT_NEAR(1.0 / std::sqrt(neumann_lambda1(Grid::line(400))), 1.0 / std::numbers::pi, 1e-5);
}
