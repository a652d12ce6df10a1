#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "pxlab/ode.hpp"

using namespace pxlab;

TEST(OdeEnvelope, BelowThresholdIsConstant) {
  const OdeEnvelope e = ode_envelope({1.0, 1.0, 2.0, 2.0, 0.5});
  EXPECT_EQ(e.branch, OdeBranch::BelowThreshold);
  for (double t : {0.0, 1.0, 100.0}) EXPECT_EQ(e(t), 1.0);
}

TEST(OdeEnvelope, PowerBranchesStartAtInitialValue) {
  for (const OdeParams& q : {OdeParams{1.0, 2.0, 3.0, 2.0, 9.0}, OdeParams{2.0, 1.0, 3.0, 2.0, 2.0}}) {
    const OdeEnvelope e = ode_envelope(q);
    EXPECT_NEAR(e(0.0), q.h0, 1e-12);
    EXPECT_NEAR(e(1e-9), q.h0, 1e-6);
  }
}

TEST(OdeEnvelope, DampingPowerRate) {
  const OdeParams q{2.0, 1.0, 3.0, 2.0, 2.0};
  const OdeEnvelope e = ode_envelope(q);
  EXPECT_EQ(e.branch, OdeBranch::DampingPower);
  const double T = std::pow(0.5, 1.0 / 3.0);
  const double k = 2.0 * std::pow(0.5, 0.5);
  for (double t : {0.0, 0.3, 4.0}) EXPECT_NEAR(e(t), T + 1.0 / (1.0 / (2.0 - T) + k * t), 1e-12);
}

TEST(OdeEnvelope, ExponentialBranchLimit) {
  const OdeParams q{1.0, 2.0, 1.0, 0.5, 40.0};
  const OdeEnvelope e = ode_envelope(q);
  EXPECT_EQ(e.branch, OdeBranch::ForcingExponential);
  EXPECT_NEAR(e.threshold, 4.0, 1e-12);
  const double limit = 2.0 * std::sqrt(40.0);
  EXPECT_NEAR(e(1e4), limit, 1e-9);
  EXPECT_LE(e.threshold, limit);
  const auto h = detail::rk4_equality(q, 40.0, 1e-3, 1000);
  EXPECT_GE(h.back(), e.threshold);
  EXPECT_NEAR(h.back(), e.threshold, 1e-2);
}

TEST(OdeEnvelope, ContinuousInTime) {
  for (const OdeParams& q : {OdeParams{1.0, 2.0, 3.0, 2.0, 9.0}, OdeParams{1.0, 2.0, 1.0, 0.5, 40.0},
                             OdeParams{2.0, 1.0, 3.0, 2.0, 2.0}, OdeParams{2.0, 0.5, 2.0, 1.0, 5.0}}) {
    const OdeEnvelope e = ode_envelope(q);
    for (double t = 0.0; t < 5.0; t += 0.25) EXPECT_NEAR(e(t), e(t + 1e-10), 1e-7);
  }
}

TEST(OdeEnvelope, RejectsInvalidParameters) {
  EXPECT_THROW(ode_envelope({0.0, 1.0, 1.0, 1.0, 1.0}), error);
  EXPECT_THROW(ode_envelope({1.0, 1.0, 1.0, 2.0, 1.0}), error);
  EXPECT_THROW(ode_envelope({1.0, 1.0, 1.0, 1.0, -1.0}), error);
}

TEST(OdeVerify, EquilibriumStartStaysAtThreshold) {
  OdeParams q{2.0, 1.0, 3.0, 2.0, 0.0};
  q.h0 = ode_envelope(q).threshold;
  const OdeVerification v = ode_verify(q);
  EXPECT_TRUE(v.passes);
  EXPECT_LE(v.max_violation, 1e-9);
}

TEST(OdeVerify, FullSweep) {
  const auto start = std::chrono::steady_clock::now();
  const auto rows = ode_sweep();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GE(rows.size(), 81u);
  for (const auto& v : rows)
    EXPECT_LE(v.max_violation, 1e-6 * (1.0 + v.scale))
        << v.params.C1 << ' ' << v.params.C2 << ' ' << v.params.alpha << ' ' << v.params.beta << ' ' << v.params.h0;
  EXPECT_LE(secs, 60.0);
}

TEST(OdeVerify, ComparisonIsMonotone) {
  for (double h0 : {0.1, 1.0, 5.0}) {
    const auto lo = detail::rk4_equality({1.0, 0.8, 2.0, 1.0, h0}, 5.0, 1e-3, 10);
    const auto hi = detail::rk4_equality({1.0, 1.6, 2.0, 1.0, h0}, 5.0, 1e-3, 10);
    ASSERT_EQ(lo.size(), hi.size());
    for (std::size_t k = 0; k < lo.size(); ++k) EXPECT_LE(lo[k], hi[k] + 1e-14);
  }
}
