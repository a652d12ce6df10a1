#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "grid.hpp"

namespace pxlab {

// h' + C1 min{h^alpha, h^beta} <= C2,  alpha >= beta > 0.
struct OdeParams {
  double C1 = 1.0, C2 = 1.0, alpha = 1.0, beta = 1.0, h0 = 0.0;
};

enum class OdeBranch {
  BelowThreshold,       // h0 <= threshold
  ForcingPower,         // C2 >= C1, beta > 1
  ForcingExponential,   // C2 >= C1, beta <= 1
  DampingPower,         // C1 > C2, beta > 1
  DampingExponential,   // C1 > C2, beta <= 1
};

inline const char* to_string(OdeBranch b) {
  switch (b) {
    case OdeBranch::BelowThreshold: return "below-threshold";
    case OdeBranch::ForcingPower: return "forcing-power";
    case OdeBranch::ForcingExponential: return "forcing-exponential";
    case OdeBranch::DampingPower: return "damping-power";
    case OdeBranch::DampingExponential: return "damping-exponential";
  }
  return "?";
}

struct OdeEnvelope {
  OdeBranch branch = OdeBranch::BelowThreshold;
  double threshold = 0.0;
  std::function<double(double)> eval;
  double operator()(double t) const { return eval(t); }
};

inline void validate(const OdeParams& q) {
  if (!(q.C1 > 0.0 && q.C2 > 0.0)) throw error("ode: C1, C2 must be positive");
  if (!(q.alpha >= q.beta && q.beta > 0.0)) throw error("ode: need alpha >= beta > 0");
  if (!(q.h0 >= 0.0)) throw error("ode: h0 must be non-negative");
}

inline OdeEnvelope ode_envelope(const OdeParams& q) {
  validate(q);
  const double C1 = q.C1, C2 = q.C2, a = q.alpha, b = q.beta, h0 = q.h0;
  OdeEnvelope env;
  const bool forcing = C2 >= C1;
  env.threshold = forcing ? std::pow(C2 / C1, 1.0 / b) : std::pow(C2 / C1, 1.0 / a);
  const double T = env.threshold;
  if (h0 <= T) {
    env.eval = [T](double) { return T; };
    return env;
  }
  if (forcing) {
    if (b > 1.0) {
      env.branch = OdeBranch::ForcingPower;
      const double z0 = std::pow(h0 - T, 1.0 - b);
      env.eval = [=](double t) { return T + std::pow(z0 + C1 * (b - 1.0) * t, 1.0 / (1.0 - b)); };
    } else {
      env.branch = OdeBranch::ForcingExponential;
      const double floor = C2 / C1 * std::pow(h0, 1.0 - b);
      const double amp = h0 * (1.0 - C2 / C1 * std::pow(h0, -b));
      const double rate = C1 * std::pow(h0, b - 1.0);
      env.eval = [=](double t) { return floor + amp * std::exp(-rate * t); };
    }
  } else {
    const double ratio = C2 / C1;
    if (b > 1.0) {
      env.branch = OdeBranch::DampingPower;
      const double z0 = std::pow(h0 - T, 1.0 - b);
      const double k = C1 * std::pow(ratio, (a - b) / (a - b + 1.0)) * (b - 1.0);
      env.eval = [=](double t) { return T + std::pow(z0 + k * t, 1.0 / (1.0 - b)); };
    } else {
      env.branch = OdeBranch::DampingExponential;
      const double q_ = std::pow(ratio, b / a);
      const double floor = q_ * std::pow(h0, 1.0 - b);
      const double amp = h0 * (1.0 - q_ * std::pow(h0, -b));
      const double rate = C2 * std::pow(1.0 / ratio, b / a) * std::pow(h0, b - 1.0);
      env.eval = [=](double t) { return floor + amp * std::exp(-rate * t); };
    }
  }
  return env;
}

struct OdeVerification {
  OdeParams params;
  OdeBranch branch = OdeBranch::BelowThreshold;
  double max_violation = 0.0;  // max over t of h(t) - envelope(t)
  double scale = 0.0;
  double dt = 0.0;
  bool passes = false;
};

namespace detail {

// RK4 for h' = C2 - C1 min{h^alpha, h^beta}, sampled every `every` steps.
inline std::vector<double> rk4_equality(const OdeParams& q, double T, double dt, int every) {
  auto f = [&](double h) {
    const double x = std::max(h, 0.0);
    return q.C2 - q.C1 * std::min(std::pow(x, q.alpha), std::pow(x, q.beta));
  };
  const long n = std::lround(T / dt);
  std::vector<double> out{q.h0};
  double h = q.h0;
  for (long i = 1; i <= n; ++i) {
    const double k1 = f(h), k2 = f(h + 0.5 * dt * k1), k3 = f(h + 0.5 * dt * k2), k4 = f(h + dt * k3);
    h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (i % every == 0) out.push_back(h);
  }
  return out;
}

}  // namespace detail

// Integrates the equality case, halving the step until two resolutions agree,
// and measures how far the solution rises above the envelope.
inline OdeVerification ode_verify(const OdeParams& q, double T = 10.0, double agree = 1e-9) {
  const OdeEnvelope env = ode_envelope(q);
  OdeVerification v;
  v.params = q;
  v.branch = env.branch;
  v.scale = std::max(q.h0, env.threshold);
  const int samples = 1000;
  const double dt_out = T / samples;
  int every = 8;
  auto coarse = detail::rk4_equality(q, T, dt_out / every, every);
  std::vector<double> fine;
  for (int level = 0; level < 12; ++level) {
    fine = detail::rk4_equality(q, T, dt_out / (2 * every), 2 * every);
    double diff = 0.0;
    for (std::size_t k = 0; k < fine.size(); ++k) diff = std::max(diff, std::abs(fine[k] - coarse[k]));
    every *= 2;
    coarse = std::move(fine);
    if (diff <= agree * (1.0 + v.scale)) break;
  }
  v.dt = dt_out / every;
  for (std::size_t k = 0; k < coarse.size(); ++k)
    v.max_violation = std::max(v.max_violation, coarse[k] - env(k * dt_out));
  v.passes = v.max_violation <= 1e-6 * (1.0 + v.scale);
  return v;
}

// Full parameter sweep: C1, C2 in {0.5,1,2}, alpha in {1,2,3},
// beta in {0.5,1,2} with beta <= alpha, h0 in {0.1, threshold, 10 threshold}.
inline std::vector<OdeVerification> ode_sweep(double T = 10.0) {
  std::vector<OdeVerification> out;
  const double cs[] = {0.5, 1.0, 2.0}, as[] = {1.0, 2.0, 3.0}, bs[] = {0.5, 1.0, 2.0};
  for (double C1 : cs)
    for (double C2 : cs)
      for (double a : as)
        for (double b : bs) {
          if (b > a) continue;
          OdeParams q{C1, C2, a, b, 0.0};
          const double thr = ode_envelope(q).threshold;
          for (double h0 : {0.1, thr, 10.0 * thr}) {
            q.h0 = h0;
            out.push_back(ode_verify(q, T));
          }
        }
  return out;
}

inline void write_ode_csv(std::ostream& os, const std::vector<OdeVerification>& rows) {
  os << "C1,C2,alpha,beta,h0,branch,max_violation\n";
  char buf[256];
  for (const auto& v : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g\n", v.params.C1, v.params.C2,
                  v.params.alpha, v.params.beta, v.params.h0, to_string(v.branch), v.max_violation);
    os << buf;
  }
}

}  // namespace pxlab
