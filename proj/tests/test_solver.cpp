#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pxlab/solver.hpp"

using namespace pxlab;

namespace {

struct Problem {
  Grid g = Grid::square(12, 12);
  ExponentField p = build_field("affine:1.8+0.35x+0.35y", g);
  ExponentField r = ExponentField::constant(g, 4.0);
};

SolverConfig quick(double t_end) {
  SolverConfig c;
  c.t_end = t_end;
  c.record_every = 5;
  return c;
}

}  // namespace

TEST(Solver, StepOfZeroIsZero) {
  const Problem s;
  EXPECT_EQ(step(GridFunction(s.g), s.p, s.r, 1e-3).sup_norm(), 0.0);
}

TEST(Solver, ZeroTrajectory) {
  const Problem s;
  const Trajectory tr = simulate(GridFunction(s.g), s.p, s.r, quick(0.01));
  EXPECT_EQ(tr.outcome.kind, OutcomeKind::GlobalUntilTend);
  for (const auto& x : tr.snapshots) {
    EXPECT_EQ(x.J, 0.0);
    EXPECT_EQ(x.l2sq, 0.0);
  }
}

TEST(Solver, RejectsBadInput) {
  const Problem s;
  EXPECT_THROW(simulate(GridFunction(s.g, 1.0), s.p, s.r, quick(0.01)), error);
  SolverConfig bad = quick(0.01);
  bad.dt_max = 0.0;
  EXPECT_THROW(simulate(GridFunction(s.g), s.p, s.r, bad), error);
}

TEST(Solver, ConservesMeanAndDissipatesEnergy) {
  const Problem s;
  const WitnessSource src(s.g, 4, 3);
  const GridFunction u0 = 0.5 * src.field(src.make(2));
  const Trajectory tr = simulate(u0, s.p, s.r, quick(0.02));
  const AuditReport a = audit_trajectory(tr);
  EXPECT_LE(a.max_mean_drift, 1e-12);
  EXPECT_TRUE(a.energy_monotone);
  EXPECT_LE(tr.max_residual_ratio, 1e-6);
  EXPECT_GT(tr.step_count, 0);
}

TEST(Solver, PureDiffusionDissipatesDirichletEnergy) {
  const Grid g = Grid::line(32);
  const ExponentField p = build_field("affine:2+1x", g);
  GridFunction u = GridFunction::sample(g, [](double x, double) { return std::cos(3.0 * x) + x * x; });
  u = project_mean_zero(u);
  auto dirichlet = [&](const GridFunction& v) {
    const auto m = cell_gradient_sq(gradient(v));
    double e = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) e += std::pow(m[k], 0.5 * p[k]) / p[k] * g.cell_volume();
    return e;
  };
  double prev = dirichlet(u);
  for (int i = 0; i < 200; ++i) {
    GridFunction d = px_flux_divergence(u, p);
    d *= 1e-5;
    u += d;
    const double e = dirichlet(u);
    EXPECT_LE(e, prev * (1.0 + 1e-14));
    prev = e;
  }
}

TEST(Solver, RayScaledDataSeparate) {
  const Problem s;
  const DepthEstimate d = estimate_depth(s.p, s.r, 2, 1, std::nullopt, {3, 20});
  const Trajectory low = simulate(0.5 * d.best_field, s.p, s.r, quick(0.1));
  EXPECT_EQ(low.outcome.kind, OutcomeKind::GlobalUntilTend);
  const AuditReport a = audit_trajectory(low, d.upper);
  EXPECT_TRUE(a.sign_checked);
  EXPECT_TRUE(a.sign_persistent);
  EXPECT_LE(a.max_identity_error, 0.05);

  const Trajectory high = simulate(1.5 * d.best_field, s.p, s.r, quick(0.1));
  EXPECT_EQ(high.outcome.kind, OutcomeKind::BlowupDetected);
  const AuditReport b = audit_trajectory(high, d.upper);
  EXPECT_TRUE(b.sign_persistent);
  EXPECT_LE(b.max_mean_drift, 1e-12);
}

TEST(Solver, ConcavityDiagnosticFormula) {
  Trajectory tr;
  for (int k = 0; k < 3; ++k) {
    EnergySnapshot s;
    s.t = 0.1 * k;
    s.l2sq = 1.0 + k;
    s.I = -1.0 - k;
    tr.snapshots.push_back(s);
  }
  const auto c = blowup_functional(tr, 4.0);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(c[2].M, 0.05 * (1 + 2) + 0.05 * (2 + 3), 1e-15);
  EXPECT_NEAR(c[2].diagnostic, 6.0 * c[2].M - 1.5 * 9.0, 1e-14);
  EXPECT_LT(c[0].diagnostic, 0.0);
}

TEST(Solver, TrajectoryCsvHeader) {
  const Problem s;
  const Trajectory tr = simulate(GridFunction(s.g), s.p, s.r, quick(0.001));
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,l2,linf,grad_modular,source_modular,J,I,delta0,dt");
}
