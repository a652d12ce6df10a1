#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "energy.hpp"
#include "ode.hpp"
#include "solver.hpp"

namespace pxlab {

enum class Regime { Subcritical, Critical, Supercritical, Outside };
enum class Prediction { Global, Blowup, Undetermined };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::Critical: return "Critical";
    case Regime::Supercritical: return "Supercritical";
    case Regime::Outside: return "Outside";
  }
  return "?";
}

inline const char* to_string(Prediction p) {
  switch (p) {
    case Prediction::Global: return "Global";
    case Prediction::Blowup: return "Blowup";
    case Prediction::Undetermined: return "Undetermined";
  }
  return "?";
}

struct Verdict {
  Regime regime = Regime::Outside;
  Prediction prediction = Prediction::Undetermined;
  std::string rule;
  std::map<std::string, double> constants;
  bool certified = false;
  bool gradient_blowup_flag = false;  // large-gradient, low-energy sufficient condition
  std::vector<std::string> notes;
};

struct ClassifierInputs {
  double depth_upper = 0.0;
  double depth_lower = 0.0;
  std::optional<double> B;               // ||u||_r <= B ||grad u||_p
  std::vector<LevelSample> level_sample; // Nehari sample for the level radii
};

inline double critical_band(double depth) { return 1e-3 * (1.0 + std::abs(depth)); }

inline Verdict classify(const GridFunction& u0, const ExponentField& p, const ExponentField& r,
                        const ClassifierInputs& in) {
  Verdict v;
  const EnergySnapshot s = snapshot(u0, p, r);
  const double J0 = s.J, I0 = s.I, l2 = std::sqrt(s.l2sq);
  const double pp = p.p_plus(), rm = r.p_minus(), rp = r.p_plus();
  v.constants = {{"J0", J0}, {"I0", I0}, {"l2", l2}, {"grad_modular", s.grad_modular},
                 {"depth_upper", in.depth_upper}, {"depth_lower", in.depth_lower}};
  const HypothesisReport h = check_hypotheses(p, r, p.grid().dimension);

  if (!h.standing_hypothesis) {
    v.regime = Regime::Outside;
    if (h.r_plus_below_p_minus) {
      v.prediction = Prediction::Global;
      v.rule = "sublinear-source-global";
    } else if (h.sublinear_source_regime && J0 < 0.0) {
      v.prediction = Prediction::Global;
      v.rule = "negative-energy-global";
    } else {
      v.rule = "no-applicable-rule";
    }
    return v;
  }

  if (in.B) {
    const double alpha1 = std::pow(*in.B + 1.0, rp * pp / (pp - rm));
    const double E1 = (rm - pp) / (pp * rm) * alpha1;
    v.constants["alpha1"] = alpha1;
    v.constants["E1"] = E1;
    v.gradient_blowup_flag = J0 < E1 && s.grad_modular > alpha1;
  }

  const double d = in.depth_upper;
  const double scale = s.grad_modular + s.source_modular;
  const bool zero_I = std::abs(I0) <= 1e-12 * scale;
  if (std::abs(J0 - d) <= critical_band(d)) {
    v.regime = Regime::Critical;
    if (I0 >= 0.0 || zero_I) {
      v.prediction = Prediction::Global;
      v.rule = "critical-nonnegative-I";
    } else {
      v.prediction = Prediction::Blowup;
      v.rule = "critical-negative-I";
    }
    return v;
  }

  if (J0 < d) {
    v.regime = Regime::Subcritical;
    if (s.grad_modular == 0.0) {
      v.prediction = Prediction::Global;
      v.rule = "trivial-datum";
    } else if (zero_I) {
      v.rule = "subcritical-on-manifold";
      v.notes.push_back("Nehari point below the depth estimate: the estimate is too high");
    } else if (I0 > 0.0) {
      v.prediction = Prediction::Global;
      v.rule = "subcritical-positive-I";
    } else {
      v.prediction = Prediction::Blowup;
      v.rule = "subcritical-negative-I";
    }
    return v;
  }

  v.regime = Regime::Supercritical;
  v.rule = "supercritical-level-radii";
  v.notes.push_back("level-radius rule applied as ||u0||_2 <= lambda_s on N+ and ||u0||_2 >= Lambda_s on N-");
  if (in.level_sample.empty()) {
    v.notes.push_back("no Nehari sample supplied");
    return v;
  }
  LevelRadii lr;
  try {
    lr = level_radii_from(J0, in.level_sample);
  } catch (const error& e) {
    v.notes.push_back(e.what());
    return v;
  }
  v.constants["lambda_s"] = lr.lambda_s;
  v.constants["Lambda_s"] = lr.Lambda_s;
  if (I0 > 0.0 && !zero_I && l2 <= lr.lambda_s)
    v.prediction = Prediction::Global;
  else if (I0 < 0.0 && !zero_I && l2 >= lr.Lambda_s)
    v.prediction = Prediction::Blowup;
  return v;
}

enum class EnvelopeKind { DecayAlgebraic, DecayExponential, L2SandwichLower, L2SandwichUpper, SublinearL2 };

inline const char* to_string(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::DecayAlgebraic: return "DecayAlgebraic";
    case EnvelopeKind::DecayExponential: return "DecayExponential";
    case EnvelopeKind::L2SandwichLower: return "L2SandwichLower";
    case EnvelopeKind::L2SandwichUpper: return "L2SandwichUpper";
    case EnvelopeKind::SublinearL2: return "SublinearL2";
  }
  return "?";
}

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::DecayAlgebraic;
  std::map<std::string, double> constants;
  std::function<double(double)> eval;
  std::vector<std::string> hypotheses;
  double operator()(double t) const { return eval(t); }
};

// Energy decay bound for data in the stable set; grad_bound scales it to the
// gradient modular.
struct DecayEnvelope {
  Envelope energy;
  double grad_factor = 0.0;
  double grad_bound(double t) const { return grad_factor * energy(t); }
};

inline DecayEnvelope decay_envelope(double J0, const ExponentField& p, const ExponentField& r, double B0,
                                    double delta0, double depth) {
  const double pm = p.p_minus(), pp = p.p_plus(), rm = r.p_minus();
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw error("decay envelope: needs 0 < delta0 < 1");
  if (pp < 2.0 - 1e-12) throw error("decay envelope: needs p+ >= 2");
  if (!(rm > pp)) throw error("decay envelope: needs r- > p+");
  if (!(J0 > 0.0)) throw error("decay envelope: needs J(u0) > 0");
  const double c = pp * rm / (rm - pp);
  const double K1 = J0;
  const double K0 = B0 * B0 / (2.0 * pm * (1.0 - delta0)) *
                    std::max(1.0, std::pow(c * depth, 2.0 / pm - 2.0 / pp)) * std::pow(c, 2.0 / pp);
  DecayEnvelope out;
  out.grad_factor = c;
  Envelope& e = out.energy;
  e.constants = {{"K0", K0}, {"K1", K1}, {"B0", B0}, {"delta0", delta0}, {"depth", depth}};
  e.hypotheses = {"J(u0) < d", "I(u0) > 0", "delta0 < 1"};
  if (std::abs(pp - 2.0) <= 1e-12) {
    e.kind = EnvelopeKind::DecayExponential;
    e.eval = [=](double t) { return K1 * std::exp((K0 - t) / K0); };
  } else {
    e.kind = EnvelopeKind::DecayAlgebraic;
    e.eval = [=](double t) { return std::pow(K1 * K1 * pp / (K1 + K0 * (pp - 2.0) * t), pp / (pp - 2.0)); };
  }
  return out;
}

// Time after which the concavity inequality holds for an unstable datum.
inline double blowup_tstar(double J0, double depth, double pm, double pp, double rm, double u0_l2, double B0) {
  if (!(J0 < depth)) throw error("t*: needs J(u0) < d");
  const double gap = depth - J0;
  const double m = std::min(std::pow(B0, -pp), std::pow(B0, -pm));
  const double a = 1.0 / gap / (2.0 * rm) * std::pow(pp * rm * std::abs(J0) / ((rm - pp) * m), 2.0 / pm);
  const double b = 2.0 * u0_l2 / std::sqrt((rm - 2.0) * gap);
  return std::max(a, b);
}

struct UnstableEnergyReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;  // max of I - r-(J - d) over checked snapshots
};

// I <= r-(J - d) on every snapshot with I < 0.
inline UnstableEnergyReport unstable_energy_check(const Trajectory& tr, double r_minus, double depth) {
  UnstableEnergyReport rep;
  for (const auto& s : tr.snapshots) {
    if (!(s.I < 0.0)) continue;
    ++rep.checked;
    const double excess = s.I - r_minus * (s.J - depth);
    if (rep.checked == 1 || excess > rep.max_excess) rep.max_excess = excess;
    if (excess > 1e-12 * (1.0 + std::abs(s.I))) ++rep.violations;
  }
  return rep;
}

// Mass condition placing a datum of any energy in the unstable set:
// p+ r/(r - p+) |Omega|^((r-2)/2) J(u0) <= ||u0||_2^r, for constant r.
inline bool large_mass_condition(const GridFunction& u0, const ExponentField& p, const ExponentField& r) {
  if (!r.is_constant()) throw error("large-mass condition: r must be constant");
  const double rc = r[0], pp = p.p_plus();
  if (!(rc > pp)) throw error("large-mass condition: needs r > p+");
  const double J = snapshot(u0, p, r).J;
  const double lhs = pp * rc / (rc - pp) * std::pow(u0.grid().volume(), 0.5 * (rc - 2.0)) * J;
  return lhs <= std::pow(std::sqrt(l2_squared(u0)), rc);
}

namespace detail {

// Mean-zero mode sin(2k pi x) cos(l pi y) on columns [i0, i1), zero elsewhere,
// with cos^2(pi x/2) in place of the sine when k = 0; it nearly vanishes at the
// strip edge facing the interior.
inline GridFunction strip_mode(const Grid& g, int i0, int i1, int k, int l) {
  GridFunction f(g);
  const int w = i1 - i0;
  double s = 0.0;
  int n = 0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = i0; i < i1; ++i) {
      const double x = (i - i0 + 0.5) / w;
      const double y = (j + 0.5) / g.ny();
      double val = std::sin(2.0 * k * std::numbers::pi * x);
      if (g.dimension == 2 && k == 0) val = std::pow(std::cos(0.5 * std::numbers::pi * x), 2);
      if (g.dimension == 2) val *= std::cos(l * std::numbers::pi * y);
      f[g.index(i, j)] = val;
      s += val;
      ++n;
    }
  for (int j = 0; j < g.ny(); ++j)
    for (int i = i0; i < i1; ++i) f[g.index(i, j)] -= s / n;
  return f;
}

}  // namespace detail

struct HighEnergyDatum {
  GridFunction u;
  double alpha = 0.0, beta = 0.0;
  double J_left = 0.0, J_right = 0.0, J = 0.0;
  int frequency = 0;
};

// Datum with J = M that lies in the unstable set: a large mean-zero bump alpha*v
// on the left half with J(alpha v) <= 0 and large mass, plus an oscillation
// beta*w on the right half carrying the remaining energy. Two zero columns
// separate the supports so J is additive.
inline HighEnergyDatum construct_high_energy_datum(double M, const ExponentField& p, const ExponentField& r) {
  const Grid& g = p.grid();
  if (!r.is_constant()) throw error("high-energy datum: r must be constant");
  const double rc = r[0], pp = p.p_plus();
  if (!(rc > pp)) throw error("high-energy datum: needs r > p+");
  if (!(M > 0.0)) throw error("high-energy datum: target energy must be positive");
  const int nx = g.nx();
  if (nx < 8) throw error("high-energy datum: grid too coarse");
  const int left_end = nx / 2 - 1, right_begin = nx / 2 + 1;

  HighEnergyDatum out;
  const GridFunction v = g.dimension == 2 ? detail::strip_mode(g, 0, left_end, 0, 1) : detail::strip_mode(g, 0, left_end, 1, 0);
  const detail::RayEvaluator ev_v(EnergyDensities::of(v, p, r), p, r);
  const double mass = pp * rc / (rc - pp) * std::pow(g.volume(), 0.5 * (rc - 2.0)) * M;
  const double v_l2 = std::sqrt(l2_squared(v));
  double alpha = 1.0;
  for (int it = 0;; ++it) {
    if (it > 400) throw error("high-energy datum: no admissible alpha");
    if (ev_v.at(alpha).J <= 0.0 && std::pow(alpha * v_l2, rc) > mass) break;
    alpha *= 1.1;
  }
  out.alpha = alpha;
  out.J_left = ev_v.at(alpha).J;
  const double target = M - out.J_left;

  for (int k = 1; k <= (nx - right_begin); ++k) {
    const GridFunction w = detail::strip_mode(g, right_begin, nx, k, g.dimension == 2 ? k : 0);
    const detail::RayEvaluator ev(EnergyDensities::of(w, p, r), p, r);
    const RayPoint one = ev.at(1.0);
    if (!(one.grad_modular > 0.0 && one.source_modular > 0.0)) continue;
    const LambdaStar top = detail::solve_lambda_star(ev, one.grad_modular, one.source_modular, pp, r.p_minus(), 1e-14);
    if (!(top.point.J > target)) continue;
    double lo = 0.0, hi = top.lambda;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ev.at(mid).J < target ? lo : hi) = mid;
    }
    out.beta = 0.5 * (lo + hi);
    out.frequency = k;
    out.J_right = ev.at(out.beta).J;
    out.u = alpha * v + out.beta * w;
    out.J = snapshot(out.u, p, r).J;
    if (std::abs(out.J - M) > 1e-6 * std::abs(M))
      throw error("high-energy datum: energy mismatch " + std::to_string(out.J) + " vs " + std::to_string(M));
    return out;
  }
  throw error("high-energy datum: no oscillation on this grid reaches the required energy");
}

// Upper bound on ||u(t)||_2^2 / B0^2 for r+ < p-: the comparison lemma with
// C1 = 1/B0^2, C2 = 2 M1/B0^2, beta = p-/2, alpha = p+/2.
inline Envelope sublinear_l2_envelope(double w0, const ExponentField& p, const ExponentField& r, double B,
                                      double B0) {
  const double pm = p.p_minus(), pp = p.p_plus(), rm = r.p_minus(), rp = r.p_plus();
  if (!(rp < pm)) throw error("sublinear envelope: needs r+ < p-");
  if (!(B > 0.0 && B0 > 0.0)) throw error("sublinear envelope: embedding constants must be positive");
  const double M1 = std::max({std::pow(2.0 * std::pow(B, rp), pm / (pm - rp)),
                              std::pow(2.0 * std::pow(B, rp), pp / (pp - rp)),
                              std::pow(2.0 * std::pow(B, rm), pm / (pm - rm)),
                              std::pow(2.0 * std::pow(B, rm), pp / (pp - rm))});
  OdeParams q{1.0 / (B0 * B0), 2.0 * M1 / (B0 * B0), 0.5 * pp, 0.5 * pm, w0};
  const OdeEnvelope ode = ode_envelope(q);
  Envelope e;
  e.kind = EnvelopeKind::SublinearL2;
  e.constants = {{"M1", M1}, {"B", B}, {"B0", B0}, {"w0", w0}, {"threshold", ode.threshold}};
  if (M1 < 0.5) {
    e.constants["C3"] = std::pow(2.0 * M1, (pp - pm) / (pp - pm + 2.0)) * (pm - 2.0) / (2.0 * B0 * B0);
    e.constants["C4"] = std::pow(w0 * B0 * B0, 0.5 * (pm - 2.0)) / std::pow(B0, pm) *
                        std::pow(2.0 * M1, (pp - pm) / pp);
  }
  e.hypotheses = {"r+ < p-", std::string("branch ") + to_string(ode.branch)};
  e.eval = ode.eval;
  return e;
}

struct L2Sandwich {
  Envelope lower, upper;
};

// Two-sided bounds on G(t) = ||u(t)||_2^2 for negative initial energy with
// r- <= min(p+, 2) and r+ < 2.
inline L2Sandwich negative_energy_l2_bounds(double G0, double E0, const ExponentField& p, const ExponentField& r,
                                            double B0, double omega_vol) {
  const double pm = p.p_minus(), pp = p.p_plus(), rm = r.p_minus(), rp = r.p_plus();
  if (!(E0 < 0.0)) throw error("negative-energy bounds: needs E(0) < 0");
  if (!(rm <= std::min(pp, 2.0))) throw error("negative-energy bounds: needs r- <= min(p+, 2)");
  if (!(rm < pp)) throw error("negative-energy bounds: needs r- < p+");
  if (!(rp < 2.0)) throw error("negative-energy bounds: needs r+ < 2");
  if (!(G0 > 0.0 && B0 > 0.0)) throw error("negative-energy bounds: needs G(0) > 0 and B0 > 0");
  const double om = 1.0 + omega_vol;
  const double X = pp * rm * E0 / ((rm - pp) * std::pow(om, rp));
  // Only the smallest of the candidates bounds G from below.
  const double M2 = std::min({G0, std::pow(X, 2.0 / rp), std::pow(X, 2.0 / rm)});
  const double C5 = 2.0 * (pp - rm) / rm * std::pow(om, rp) *
                    std::max(std::pow(M2, 0.5 * (rp - 2.0)), std::pow(M2, 0.5 * (rm - 2.0)));
  const double m = M2 / (B0 * B0);
  const double C6 = (2.0 - rp) / (B0 * B0) * std::min(std::pow(m, 0.5 * (pp - 2.0)), std::pow(m, 0.5 * (pm - 2.0)));
  const double C7 = std::max(std::pow(m, 0.5 * (rm - rp)), 1.0) * (2.0 - rp) * std::pow(B0, -rp) *
                    std::pow(om, 0.5 * rp);
  const std::map<std::string, double> k = {{"M2", M2}, {"C5", C5}, {"C6", C6}, {"C7", C7},
                                           {"G0", G0}, {"E0", E0}, {"B0", B0}};
  const std::vector<std::string> hyp = {"E(0) < 0", "r- <= min(p+,2)", "r+ < 2"};
  L2Sandwich out;
  out.lower.kind = EnvelopeKind::L2SandwichLower;
  out.lower.constants = k;
  out.lower.hypotheses = hyp;
  const double floor = -2.0 * pp * E0 / C5;
  out.lower.eval = [=](double t) { return (G0 - floor) * std::exp(-C5 * t) + floor; };
  out.upper.kind = EnvelopeKind::L2SandwichUpper;
  out.upper.constants = k;
  out.upper.hypotheses = hyp;
  const double ratio = C7 / C6, e = 0.5 * (2.0 - rp);
  out.upper.eval = [=](double t) {
    return std::pow(ratio + (std::pow(G0, e) - ratio) * std::exp(-C6 * t), 1.0 / e);
  };
  return out;
}

}  // namespace pxlab
