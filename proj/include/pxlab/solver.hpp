#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "energy.hpp"

namespace pxlab {

struct SolverConfig {
  double dt_init = 1e-6;
  double dt_min = 1e-15;
  double dt_max = 1e-3;
  double t_end = 1.0;
  double energy_tol = 1e-6;
  double blowup_threshold = 1e6;
  double delta = 1e-8;
  int record_every = 10;
  long max_steps = 20'000'000;
};

enum class OutcomeKind { GlobalUntilTend, BlowupDetected, StalledDt };

inline const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::GlobalUntilTend: return "GlobalUntilTend";
    case OutcomeKind::BlowupDetected: return "BlowupDetected";
    case OutcomeKind::StalledDt: return "StalledDt";
  }
  return "?";
}

struct Outcome {
  OutcomeKind kind = OutcomeKind::GlobalUntilTend;
  double t = 0.0;  // blow-up or stall time
};

struct Trajectory {
  std::vector<double> times;
  std::vector<EnergySnapshot> snapshots;
  std::vector<double> linf, mean, dt;
  Outcome outcome;
  long step_count = 0;
  long rejected = 0;
  double energy_budget_used = 0.0;  // sum of dt * ||(u+ - u)/dt||^2
  double max_residual_ratio = 0.0;  // max |residual| / (1 + |J|) over accepted steps
  GridFunction final_state;
};


// One explicit Euler step of u_t = div(flux) + |u|^(r-2)u - mean(|u|^(r-2)u).
inline GridFunction step(const GridFunction& u, const ExponentField& p, const ExponentField& r, double dt,
                         const SolverConfig& cfg = {}) {
  GridFunction v = flow_rate(u, p, r, cfg.delta);
  v *= dt;
  v += u;
  return v;
}

inline Trajectory simulate(const GridFunction& u0, const ExponentField& p, const ExponentField& r,
                           const SolverConfig& cfg) {
  require_same_grid(u0.grid(), p.grid());
  require_same_grid(u0.grid(), r.grid());
  if (!(cfg.dt_init > 0.0 && cfg.dt_min > 0.0 && cfg.dt_max >= cfg.dt_min && cfg.t_end > 0.0))
    throw error("solver: invalid time-step settings");
  const double l2_0 = std::sqrt(l2_squared(u0));
  if (std::abs(mean(u0)) > 1e-10 * (1.0 + l2_0)) throw error("solver: initial datum must have zero mean");

  Trajectory tr;
  GridFunction u = u0;
  double t = 0.0, dt = std::min(cfg.dt_init, cfg.dt_max), last_dt = 0.0;
  double E = regularised_energy(u, p, r, cfg.delta);
  GridFunction v = flow_rate(u, p, r, cfg.delta);
  double v2 = l2_squared(v);
  int streak = 0;

  auto record = [&] {
    tr.times.push_back(t);
    tr.snapshots.push_back(snapshot(u, p, r, t));
    tr.linf.push_back(u.sup_norm());
    tr.mean.push_back(mean(u));
    tr.dt.push_back(last_dt);
  };
  record();

  while (t < cfg.t_end) {
    if (tr.step_count >= cfg.max_steps) {
      tr.outcome = {OutcomeKind::StalledDt, t};
      break;
    }
    const double h = std::min(dt, cfg.t_end - t);
    GridFunction u1 = v;
    u1 *= h;
    u1 += u;
    double E1 = std::numeric_limits<double>::quiet_NaN();
    bool finite = true;
    for (double x : u1.values()) finite = finite && std::isfinite(x);
    if (finite) E1 = regularised_energy(u1, p, r, cfg.delta);
    const double residual = E1 - E + h * v2;
    // Accept when the discrete energy law holds to tolerance and the step
    // still dissipates at least half of the predicted amount.
    const bool ok = std::isfinite(E1) && std::abs(residual) <= cfg.energy_tol * (1.0 + std::abs(E)) &&
                    E1 - E <= -0.5 * h * v2;
    if (!ok) {
      ++tr.rejected;
      streak = 0;
      dt = 0.5 * h;
      if (dt < cfg.dt_min) {
        const double prev = tr.linf.back();
        const bool growing = u.sup_norm() > prev * (1.0 + 1e-12) || u.sup_norm() >= cfg.blowup_threshold;
        record();
        tr.outcome = {growing ? OutcomeKind::BlowupDetected : OutcomeKind::StalledDt, t};
        break;
      }
      continue;
    }
    tr.max_residual_ratio = std::max(tr.max_residual_ratio, std::abs(residual) / (1.0 + std::abs(E)));
    tr.energy_budget_used += h * v2;
    u = std::move(u1);
    t = (h == cfg.t_end - t) ? cfg.t_end : t + h;
    E = E1;
    last_dt = h;
    ++tr.step_count;
    if (++streak == 5) {
      dt = std::min(dt * 1.25, cfg.dt_max);
      streak = 0;
    }
    const double sup = u.sup_norm();
    if (sup >= cfg.blowup_threshold) {
      record();
      tr.outcome = {OutcomeKind::BlowupDetected, t};
      break;
    }
    if (t >= cfg.t_end) {
      record();
      tr.outcome = {OutcomeKind::GlobalUntilTend, t};
      break;
    }
    if (tr.step_count % cfg.record_every == 0) record();
    v = flow_rate(u, p, r, cfg.delta);
    v2 = l2_squared(v);
  }
  tr.final_state = std::move(u);
  return tr;
}

// ---------------------------------------------------------------------------
// Post-hoc checks along a recorded trajectory.

struct AuditReport {
  bool energy_monotone = true;
  double max_energy_increase = 0.0;
  double max_identity_error = 0.0;  // relative |d/dt ||u||^2 + 2I| / |2I|
  std::size_t identity_points = 0;
  bool sign_checked = false;
  bool sign_persistent = true;
  double max_mean_drift = 0.0;  // |mean u| / (1 + ||u||_2)
};

inline AuditReport audit_trajectory(const Trajectory& tr, std::optional<double> depth = {}) {
  AuditReport a;
  const auto& s = tr.snapshots;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double inc = s[k].J - s[k - 1].J;
    if (inc > 1e-12 * (1.0 + std::abs(s[k - 1].J))) a.energy_monotone = false;
    a.max_energy_increase = std::max(a.max_energy_increase, inc);
  }
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double hm = s[k].t - s[k - 1].t, hp = s[k + 1].t - s[k].t;
    if (!(hm > 0.0 && hp > 0.0)) continue;
    const double scale = s[k].grad_modular + s[k].source_modular;
    if (!(std::abs(s[k].I) > 1e-10 * scale)) continue;
    const double D = (hm * hm * s[k + 1].l2sq - hp * hp * s[k - 1].l2sq + (hp * hp - hm * hm) * s[k].l2sq) /
                     (hm * hp * (hm + hp));
    a.max_identity_error = std::max(a.max_identity_error, std::abs(D + 2.0 * s[k].I) / std::abs(2.0 * s[k].I));
    ++a.identity_points;
  }
  if (depth && !s.empty() && s.front().J < *depth) {
    a.sign_checked = true;
    const bool positive = s.front().I > 0.0;
    const bool negative = s.front().I < 0.0;
    for (const auto& x : s) {
      if (positive && !(x.I > 0.0) && x.l2sq > 0.0) a.sign_persistent = false;
      if (negative && !(x.I < 0.0)) a.sign_persistent = false;
    }
  }
  for (std::size_t k = 0; k < s.size(); ++k)
    a.max_mean_drift = std::max(a.max_mean_drift, std::abs(tr.mean[k]) / (1.0 + std::sqrt(s[k].l2sq)));
  return a;
}

struct ConcavityPoint {
  double t = 0.0, M = 0.0, M1 = 0.0, M2 = 0.0, diagnostic = 0.0;
};

// M(t) = int_0^t ||u||^2, M' = ||u||^2, M'' = -2I, and M''M - ((r-+2)/4) M'^2.
inline std::vector<ConcavityPoint> blowup_functional(const Trajectory& tr, double r_minus) {
  std::vector<ConcavityPoint> out;
  double M = 0.0;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const auto& s = tr.snapshots[k];
    if (k > 0) M += 0.5 * (s.t - tr.snapshots[k - 1].t) * (s.l2sq + tr.snapshots[k - 1].l2sq);
    ConcavityPoint c;
    c.t = s.t;
    c.M = M;
    c.M1 = s.l2sq;
    c.M2 = -2.0 * s.I;
    c.diagnostic = c.M2 * c.M - 0.25 * (r_minus + 2.0) * c.M1 * c.M1;
    out.push_back(c);
  }
  return out;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,l2,linf,grad_modular,source_modular,J,I,delta0,dt\n";
  char buf[512];
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const auto& s = tr.snapshots[k];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                  std::sqrt(s.l2sq), tr.linf[k], s.grad_modular, s.source_modular, s.J, s.I, s.delta0,
                  tr.dt[k]);
    os << buf;
  }
}

}  // namespace pxlab
