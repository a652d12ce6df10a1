#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "exponent_field.hpp"

namespace pxlab {

// rho_q(f) = integral of |f|^q(x).
inline double modular(const GridFunction& f, const ExponentField& q) {
  require_same_grid(f.grid(), q.grid());
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double a = std::abs(f[k]);
    if (a > 0.0) s += std::pow(a, q[k]);
  }
  return s * f.grid().cell_volume();
}

struct NormResult {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |rho(f/value) - 1|
};

namespace detail {

// Modular of f/lambda from precomputed log|f|.
inline double scaled_modular(const std::vector<double>& logf, const std::vector<double>& q,
                             double lambda, double vol) {
  const double ll = std::log(lambda);
  double s = 0.0;
  for (std::size_t k = 0; k < logf.size(); ++k)
    if (logf[k] > -std::numeric_limits<double>::infinity()) s += std::exp(q[k] * (logf[k] - ll));
  return s * vol;
}

}  // namespace detail

// Luxemburg norm inf{lambda > 0 : rho(f/lambda) <= 1} by bisection.
inline NormResult luxemburg_norm(const GridFunction& f, const ExponentField& q, double tol = 1e-12) {
  require_same_grid(f.grid(), q.grid());
  NormResult res;
  std::vector<double> logf(f.size());
  bool nonzero = false;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double a = std::abs(f[k]);
    if (!std::isfinite(a)) throw error("luxemburg_norm: non-finite value");
    logf[k] = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
    nonzero = nonzero || a > 0.0;
  }
  if (!nonzero) return res;
  const double vol = f.grid().cell_volume();
  auto rho = [&](double lam) { return detail::scaled_modular(logf, q.values(), lam, vol); };

  // Seed bracket from the power sandwich between norm and modular.
  const double m = rho(1.0);
  double lo = std::min(std::pow(m, 1.0 / q.p_minus()), std::pow(m, 1.0 / q.p_plus()));
  double hi = std::max(std::pow(m, 1.0 / q.p_minus()), std::pow(m, 1.0 / q.p_plus()));
  if (!(lo > 0.0) || !std::isfinite(hi)) {
    lo = 1.0;
    hi = 1.0;
  }
  lo *= 0.999;
  hi *= 1.001;
  int doublings = 0;
  while (rho(hi) > 1.0) {
    hi *= 2.0;
    if (++doublings > 200) throw error("luxemburg_norm: bracket did not close");
  }
  while (rho(lo) <= 1.0) {
    lo *= 0.5;
    if (++doublings > 200) throw error("luxemburg_norm: bracket did not close");
  }
  double mid = hi, r = rho(hi);
  for (int it = 0; it < 400; ++it) {
    res.iterations = it + 1;
    mid = 0.5 * (lo + hi);
    r = rho(mid);
    if (std::abs(r - 1.0) <= tol) break;
    if (r > 1.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      mid = hi;
      r = rho(hi);
      break;
    }
  }
  res.value = mid;
  res.residual = std::abs(r - 1.0);
  return res;
}

// Norm/modular relations on the unit sphere and outside/inside the unit ball.
struct UnitBallReport {
  double norm = 0.0, modular = 0.0;
  bool clause_sign = true;   // rho > 1, = 1, < 1 matches norm > 1, = 1, < 1
  bool clause_outside = true;  // norm > 1: norm^q- <= rho <= norm^q+
  bool clause_inside = true;   // norm < 1: norm^q+ <= rho <= norm^q-
  bool clause_limits = true;   // the norm and modular agree on being zero
  double worst_violation = 0.0;  // relative
  bool all() const { return clause_sign && clause_outside && clause_inside && clause_limits; }
};

inline UnitBallReport check_unit_ball_relations(const GridFunction& f, const ExponentField& q,
                                                double slack = 1e-10) {
  UnitBallReport rep;
  rep.modular = modular(f, q);
  rep.norm = luxemburg_norm(f, q).value;
  const double n = rep.norm, rho = rep.modular;
  rep.clause_limits = (n == 0.0) == (rho == 0.0);
  if (n == 0.0) return rep;
  const double near = 1e-9;
  if (std::abs(n - 1.0) > near && std::abs(rho - 1.0) > near)
    rep.clause_sign = (n > 1.0) == (rho > 1.0);
  auto viol = [&](double lower, double value, double upper) {
    const double v = std::max({0.0, (lower - value) / std::abs(value), (value - upper) / std::abs(value)});
    rep.worst_violation = std::max(rep.worst_violation, v);
    return v <= slack;
  };
  if (n > 1.0)
    rep.clause_outside = viol(std::pow(n, q.p_minus()), rho, std::pow(n, q.p_plus()));
  else
    rep.clause_inside = viol(std::pow(n, q.p_plus()), rho, std::pow(n, q.p_minus()));
  return rep;
}

struct HolderReport {
  double lhs = 0.0, rhs = 0.0;
  bool holds = true;
};

// |integral uv| <= 2 ||u||_q ||v||_q'.
inline HolderReport check_holder(const GridFunction& u, const GridFunction& v, const ExponentField& q,
                                 double slack = 1e-10) {
  HolderReport rep;
  rep.lhs = std::abs(inner(u, v));
  rep.rhs = 2.0 * luxemburg_norm(u, q).value * luxemburg_norm(v, q.conjugate()).value;
  rep.holds = rep.lhs <= rep.rhs * (1.0 + slack);
  return rep;
}

struct ThetaResult {
  double theta = 0.0;
  bool in_unit_interval = false;
};

// Interpolation exponent for ||u||_r <= C ||grad u||_p^theta ||u||_2^(1-theta).
inline ThetaResult gn_theta(double p_minus, double r_plus, int N) {
  ThetaResult t;
  t.theta = (0.5 - 1.0 / r_plus) / (0.5 + 1.0 / N - 1.0 / p_minus);
  t.in_unit_interval = t.theta > 0.0 && t.theta < 1.0;
  return t;
}

}  // namespace pxlab
