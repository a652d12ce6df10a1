#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "embedding.hpp"
#include "modular.hpp"
#include "spectral.hpp"
#include "witness.hpp"

namespace pxlab {

inline constexpr double kUndefinedRatio = -1.0;

struct EnergySnapshot {
  double t = 0.0;
  double J = 0.0;
  double I = 0.0;
  double grad_modular = 0.0;
  double source_modular = 0.0;
  double delta0 = kUndefinedRatio;  // source/grad, undefined when grad = 0
  double l2sq = 0.0;
};

// Per-cell densities |grad u|^p and |u|^r; the ray lambda*u scales them by
// lambda^p and lambda^r cell by cell.
struct EnergyDensities {
  std::vector<double> grad, source;
  double vol = 0.0;

  static EnergyDensities of(const GridFunction& u, const ExponentField& p, const ExponentField& r) {
    require_same_grid(u.grid(), p.grid());
    require_same_grid(u.grid(), r.grid());
    EnergyDensities d;
    d.vol = u.grid().cell_volume();
    const auto m = cell_gradient_sq(gradient(u));
    d.grad.resize(u.size());
    d.source.resize(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      d.grad[k] = m[k] > 0.0 ? std::pow(m[k], 0.5 * p[k]) : 0.0;
      const double a = std::abs(u[k]);
      d.source[k] = a > 0.0 ? std::pow(a, r[k]) : 0.0;
    }
    return d;
  }
};

struct RayPoint {
  double lambda = 0.0, J = 0.0, I = 0.0, grad_modular = 0.0, source_modular = 0.0;
};

namespace detail {

struct RayEvaluator {
  std::vector<double> lg, ls, p, r;  // logs of nonzero densities with their exponents
  double vol = 0.0;

  RayEvaluator(const EnergyDensities& d, const ExponentField& pf, const ExponentField& rf) : vol(d.vol) {
    for (std::size_t k = 0; k < d.grad.size(); ++k) {
      if (d.grad[k] > 0.0) {
        lg.push_back(std::log(d.grad[k]));
        p.push_back(pf[k]);
      }
      if (d.source[k] > 0.0) {
        ls.push_back(std::log(d.source[k]));
        r.push_back(rf[k]);
      }
    }
  }

  RayPoint at(double lambda) const {
    const double ll = std::log(lambda);
    RayPoint pt;
    pt.lambda = lambda;
    double a = 0.0, ja = 0.0;
    for (std::size_t k = 0; k < lg.size(); ++k) {
      const double v = std::exp(lg[k] + p[k] * ll);
      a += v;
      ja += v / p[k];
    }
    double b = 0.0, jb = 0.0;
    for (std::size_t k = 0; k < ls.size(); ++k) {
      const double v = std::exp(ls[k] + r[k] * ll);
      b += v;
      jb += v / r[k];
    }
    pt.grad_modular = a * vol;
    pt.source_modular = b * vol;
    pt.J = (ja - jb) * vol;
    pt.I = (a - b) * vol;
    return pt;
  }

  // lambda * dI/dlambda
  double scaled_slope(double lambda) const {
    const double ll = std::log(lambda);
    double s = 0.0;
    for (std::size_t k = 0; k < lg.size(); ++k) s += p[k] * std::exp(lg[k] + p[k] * ll);
    for (std::size_t k = 0; k < ls.size(); ++k) s -= r[k] * std::exp(ls[k] + r[k] * ll);
    return s * vol;
  }
};

}  // namespace detail

inline EnergySnapshot snapshot(const GridFunction& u, const ExponentField& p, const ExponentField& r,
                               double t = 0.0) {
  const auto d = EnergyDensities::of(u, p, r);
  EnergySnapshot s;
  s.t = t;
  double a = 0.0, b = 0.0, ja = 0.0, jb = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    a += d.grad[k];
    b += d.source[k];
    ja += d.grad[k] / p[k];
    jb += d.source[k] / r[k];
  }
  s.grad_modular = a * d.vol;
  s.source_modular = b * d.vol;
  s.J = (ja - jb) * d.vol;
  s.I = (a - b) * d.vol;
  s.delta0 = s.grad_modular > 0.0 ? s.source_modular / s.grad_modular : kUndefinedRatio;
  s.l2sq = l2_squared(u);
  return s;
}

inline std::vector<RayPoint> ray_profile(const GridFunction& u, const ExponentField& p,
                                         const ExponentField& r, const std::vector<double>& lambdas) {
  const detail::RayEvaluator ev(EnergyDensities::of(u, p, r), p, r);
  std::vector<RayPoint> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) {
    if (!(l > 0.0)) throw error("ray_profile: lambda must be positive");
    out.push_back(ev.at(l));
  }
  return out;
}

struct LambdaStar {
  double lambda = 0.0;
  RayPoint point;
  int iterations = 0;
};

namespace detail {

// Unique root of I(lambda u) = 0 on the ray, bracketed from the power bounds
// and refined by safeguarded Newton in log(lambda).
inline LambdaStar solve_lambda_star(const RayEvaluator& ev, double a, double b, double pp, double rm,
                                    double tol) {
  double lo = std::pow(a / b, 1.0 / (rm - pp));
  double hi = lo;
  int guard = 0;
  while (ev.at(lo).I <= 0.0) {
    lo *= 0.5;
    if (++guard > 400) throw error("lambda*: bracket search failed");
  }
  while (ev.at(hi).I >= 0.0) {
    hi *= 2.0;
    if (++guard > 400) throw error("lambda*: bracket search failed");
  }
  LambdaStar ls;
  double x = std::sqrt(lo * hi);
  for (int it = 0; it < 200; ++it) {
    ls.iterations = it + 1;
    const RayPoint pt = ev.at(x);
    if (std::abs(pt.I) <= tol * pt.grad_modular) {
      ls.lambda = x;
      ls.point = pt;
      return ls;
    }
    if (pt.I > 0.0)
      lo = x;
    else
      hi = x;
    const double slope = ev.scaled_slope(x);
    double next = slope < 0.0 ? x * std::exp(-pt.I / slope) : 0.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      ls.lambda = x;
      ls.point = pt;
      return ls;
    }
    x = next;
  }
  ls.lambda = x;
  ls.point = ev.at(x);
  return ls;
}

}  // namespace detail

// Scaling lambda* > 0 with lambda* u on the Nehari manifold.
inline LambdaStar find_lambda_star(const GridFunction& u, const ExponentField& p, const ExponentField& r,
                                   double tol = 1e-12) {
  if (!(r.p_minus() > p.p_plus())) throw error("lambda*: requires r- > p+");
  const detail::RayEvaluator ev(EnergyDensities::of(u, p, r), p, r);
  const RayPoint one = ev.at(1.0);
  if (!(one.grad_modular > 0.0)) throw error("lambda*: gradient modular vanishes");
  if (!(one.source_modular > 0.0)) throw error("lambda*: source modular vanishes");
  return detail::solve_lambda_star(ev, one.grad_modular, one.source_modular, p.p_plus(), r.p_minus(), tol);
}

// Energy whose L2 gradient is exactly minus flow_rate: the gradient term
// carries the delta regularisation, the rest matches J.
inline double regularised_energy(const GridFunction& u, const ExponentField& p, const ExponentField& r,
                                 double delta) {
  const auto m = cell_gradient_sq(gradient(u));
  const double d2 = delta * delta;
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double q = p[k];
    if (m[k] > 0.0) {
      if (delta > 0.0)
        s += std::pow(delta, q) * std::expm1(0.5 * q * std::log1p(m[k] / d2)) / q;
      else
        s += std::pow(m[k], 0.5 * q) / q;
    }
    const double a = std::abs(u[k]);
    if (a > 0.0) s -= std::pow(a, r[k]) / r[k];
  }
  return s * u.grid().cell_volume();
}

// div(flux) + |u|^(r-2)u - mean(|u|^(r-2)u).
inline GridFunction flow_rate(const GridFunction& u, const ExponentField& p, const ExponentField& r,
                              double delta) {
  GridFunction v = px_flux_divergence_from(u, p.values(), delta);
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double a = std::abs(u[k]);
    if (a > 0.0) v[k] += std::copysign(std::pow(a, r[k] - 1.0), u[k]);
  }
  // The flux divergence integrates to zero, so this removes exactly the source mean.
  return project_mean_zero(std::move(v));
}

struct NehariPoint {
  bool ok = false;
  double lambda = 0.0;
  RayPoint point;
  GridFunction u;  // already scaled onto the manifold
};

inline NehariPoint nehari_project(const GridFunction& u, const ExponentField& p, const ExponentField& r) {
  NehariPoint np;
  const detail::RayEvaluator ev(EnergyDensities::of(u, p, r), p, r);
  if (ev.lg.empty() || ev.ls.empty()) return np;
  const RayPoint one = ev.at(1.0);
  const auto ls = detail::solve_lambda_star(ev, one.grad_modular, one.source_modular, p.p_plus(),
                                            r.p_minus(), 1e-12);
  np.ok = true;
  np.lambda = ls.lambda;
  np.point = ls.point;
  np.u = ls.lambda * u;
  return np;
}

// Steepest descent of J restricted to the Nehari manifold: a step along the
// smoothed flow direction, then rescaling back onto the manifold. The
// smoother (I + s A)^{-1} removes the grid stiffness.
template <class Visit>
NehariPoint nehari_descent(NehariPoint start, const ExponentField& p, const ExponentField& r,
                           const CosineTransform& smoother, int steps, Visit&& visit) {
  const Grid& g = p.grid();
  const double s = std::pow(std::max(g.lengths[0], g.dimension == 2 ? g.lengths[1] : 0.0), 2);
  double tau = 1.0;
  NehariPoint cur = std::move(start);
  for (int it = 0; it < steps; ++it) {
    GridFunction dir = smoother.smooth(flow_rate(cur.u, p, r, 1e-8), s);
    dir *= tau;
    dir += cur.u;
    NehariPoint next = nehari_project(dir, p, r);
    if (next.ok && next.point.J < cur.point.J) {
      const double gain = (cur.point.J - next.point.J) / std::max(1e-300, std::abs(cur.point.J));
      cur = std::move(next);
      visit(cur);
      tau *= 1.5;
      if (gain < 1e-13) break;
    } else {
      tau *= 0.3;
      if (tau < 1e-12) break;
    }
  }
  return cur;
}

struct DepthEstimate {
  double upper = std::numeric_limits<double>::infinity();
  double lower_formula = 0.0;
  std::size_t witnesses = 0;
  std::string best_witness;
  std::string embedding_id;
  GridFunction best_field;  // on the Nehari manifold
};

struct DepthOptions {
  int max_mode = 4;
  int descent_steps = 50;
};

// Lower bound on the depth from an embedding constant B.
inline double depth_lower_formula(double B, double pm, double pp, double rm, double rp) {
  const double c = (rm - pp) / (pp * rm);
  return c * std::min(std::pow(B, rp * pm / (pm - rp)), std::pow(B, rm * pp / (pp - rm)));
}

// Upper estimate of inf J over the Nehari manifold: every witness is
// projected onto the manifold and descended; the minimum is kept. Witness i
// and its descent depend only on (seed, i), so more trials never raise it.
inline DepthEstimate estimate_depth(const ExponentField& p, const ExponentField& r, std::size_t trials,
                                    std::uint64_t seed, const std::optional<EmbeddingEstimate>& B = {},
                                    const DepthOptions& opt = {}) {
  if (!(r.p_minus() > p.p_plus())) throw error("depth: requires r- > p+");
  DepthEstimate est;
  est.witnesses = trials;
  if (B) {
    est.lower_formula = depth_lower_formula(B->constant, p.p_minus(), p.p_plus(), r.p_minus(), r.p_plus());
    est.embedding_id = B->best_witness;
  }
  WitnessSource src(p.grid(), seed, opt.max_mode);
  const CosineTransform smoother(p.grid());
  for (std::size_t i = 0; i < trials; ++i) {
    const Witness w = src.make(i);
    NehariPoint np = nehari_project(src.field(w), p, r);
    if (!np.ok) continue;
    np = nehari_descent(std::move(np), p, r, smoother, opt.descent_steps, [](const NehariPoint&) {});
    if (np.point.J < est.upper) {
      est.upper = np.point.J;
      est.best_witness = w.id;
      est.best_field = std::move(np.u);
    }
  }
  if (!std::isfinite(est.upper)) throw error("depth: no admissible witness");
  return est;
}

struct LevelRadii {
  double s = 0.0;
  double lambda_s = std::numeric_limits<double>::infinity();  // min ||u||_2 on N with J <= s
  double Lambda_s = 0.0;                                       // max ||u||_2 on N with J <= s
  std::optional<double> M_bound;
  std::size_t admitted = 0;
};

struct LevelSample {
  double J = 0.0, l2 = 0.0, grad_modular = 0.0;
};

// Nehari points from the witness stream and every point visited by their
// descents. The sample does not depend on s, so level sets are nested.
inline std::vector<LevelSample> sample_nehari(const ExponentField& p, const ExponentField& r,
                                              std::size_t samples, std::uint64_t seed,
                                              const DepthOptions& opt = {}) {
  WitnessSource src(p.grid(), seed, opt.max_mode);
  const CosineTransform smoother(p.grid());
  std::vector<LevelSample> out;
  auto keep = [&](const NehariPoint& np) {
    out.push_back({np.point.J, std::sqrt(l2_squared(np.u)), np.point.grad_modular});
  };
  for (std::size_t i = 0; i < samples; ++i) {
    NehariPoint np = nehari_project(src.field(src.make(i)), p, r);
    if (!np.ok) continue;
    keep(np);
    nehari_descent(std::move(np), p, r, smoother, opt.descent_steps, keep);
  }
  return out;
}

struct LevelBoundInputs {
  double Ctilde = 0.0, theta = 0.0, depth = 0.0;
};

// s-independent lower bound on the level radius, defined when
// 2 <= r+ <= (1 + 2/N) p-.
inline std::optional<double> level_radius_lower_bound(const ExponentField& p, const ExponentField& r,
                                                      const LevelBoundInputs& in) {
  const double pm = p.p_minus(), pp = p.p_plus(), rm = r.p_minus(), rp = r.p_plus();
  const int N = p.grid().dimension;
  if (!(2.0 <= rp && rp <= (1.0 + 2.0 / N) * pm)) return std::nullopt;
  if (!(in.Ctilde > 0.0) || !(in.depth > 0.0)) return std::nullopt;
  const double base = pm * rp / (rp - pm) * in.depth;
  const double e = 1.0 / (1.0 - in.theta);
  const double a = std::pow(std::pow(base, 1.0 / rp - in.theta / pm) / in.Ctilde, e);
  const double b = std::pow(std::pow(base, 1.0 / rm - in.theta / pp) / in.Ctilde, e);
  return std::min(a, b);
}

inline LevelRadii level_radii_from(double s, const std::vector<LevelSample>& sample) {
  LevelRadii lr;
  lr.s = s;
  for (const auto& x : sample) {
    if (x.J > s) continue;
    ++lr.admitted;
    lr.lambda_s = std::min(lr.lambda_s, x.l2);
    lr.Lambda_s = std::max(lr.Lambda_s, x.l2);
  }
  if (lr.admitted == 0) throw error("level radii: no sampled Nehari point with J <= s");
  return lr;
}

inline LevelRadii estimate_level_radii(double s, const ExponentField& p, const ExponentField& r,
                                       std::size_t samples, std::uint64_t seed,
                                       const std::optional<LevelBoundInputs>& bound = {}) {
  if (!(r.p_minus() > p.p_plus())) throw error("level radii: requires r- > p+");
  LevelRadii lr = level_radii_from(s, sample_nehari(p, r, samples, seed));
  if (bound) lr.M_bound = level_radius_lower_bound(p, r, *bound);
  return lr;
}

}  // namespace pxlab
