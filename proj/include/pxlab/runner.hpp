#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "classifier.hpp"
#include "config.hpp"

namespace pxlab {

using json = nlohmann::json;

// Error raised inside a named pipeline stage.
class stage_error : public error {
 public:
  stage_error(std::string stage, const std::string& what) : error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunEstimates {
  std::optional<EmbeddingEstimate> B, B0;
  std::optional<DepthEstimate> depth;
  std::vector<LevelSample> level_sample;
  std::string B_id, B0_id, depth_id, level_id;
};

// Observed quantity against a bound along a trajectory.
struct EnvelopeSeries {
  std::string name;
  std::string kind;
  bool upper = true;
  std::map<std::string, double> constants;
  std::vector<double> t, observed, bound;
  double worst_ratio = 0.0;  // observed/bound for upper bounds, bound/observed for lower bounds

  void add(double time, double obs, double b) {
    t.push_back(time);
    observed.push_back(obs);
    bound.push_back(b);
    const double ratio = upper ? obs / b : b / obs;
    if (std::isfinite(ratio)) worst_ratio = std::max(worst_ratio, ratio);
  }
  bool passes(double slack = 1.05) const { return worst_ratio <= slack; }
};

inline EnvelopeSeries make_series(std::string name, std::string kind, bool upper,
                                  std::map<std::string, double> constants) {
  EnvelopeSeries e;
  e.name = std::move(name);
  e.kind = std::move(kind);
  e.upper = upper;
  e.constants = std::move(constants);
  return e;
}

struct RunResult {
  json record;
  std::optional<Trajectory> trajectory;
  std::vector<EnvelopeSeries> envelopes;
  double wall_time = 0.0;
  int exit_code = 0;
};

namespace detail {

template <class F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const stage_error&) {
    throw;
  } catch (const std::exception& e) {
    throw stage_error(stage, e.what());
  }
}

inline std::string embedding_id(const EmbeddingEstimate& e, std::uint64_t seed) {
  return std::string(to_string(e.kind)) + "/" + std::to_string(seed) + "/" + std::to_string(e.trials) + "/" +
         e.best_witness;
}

inline json constants_json(const std::map<std::string, double>& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

}  // namespace detail

inline RunEstimates compute_estimates(const RunConfig& cfg, const ExponentField& p, const ExponentField& r,
                                      std::uint64_t seed) {
  RunEstimates est;
  const EmbeddingOptions eo{cfg.estimates.max_mode};
  est.B0 = estimate_embedding(p, std::nullopt, cfg.estimates.embedding_trials, seed, EmbeddingKind::B0, eo);
  est.B0_id = detail::embedding_id(*est.B0, seed);
  est.B = estimate_embedding(p, r, cfg.estimates.embedding_trials, seed, EmbeddingKind::B, eo);
  est.B_id = detail::embedding_id(*est.B, seed);
  if (r.p_minus() > p.p_plus()) {
    const DepthOptions dopt{cfg.estimates.max_mode, cfg.estimates.descent_steps};
    est.depth = estimate_depth(p, r, cfg.estimates.depth_trials, seed, est.B, dopt);
    est.depth_id = "depth/" + std::to_string(seed) + "/" + std::to_string(cfg.estimates.depth_trials) + "/" +
                   est.depth->best_witness;
  }
  return est;
}

inline GridFunction make_initial(const RunConfig& cfg, const ExponentField& p, const ExponentField& r,
                                 const RunEstimates& est, std::uint64_t seed) {
  const InitialDatum& in = cfg.initial;
  const Grid& g = cfg.grid;
  if (in.kind == "zero") return GridFunction(g);
  if (in.kind == "witness") {
    const WitnessSource src(g, seed, cfg.estimates.max_mode);
    return in.scale * src.field(src.make(in.index));
  }
  if (in.kind == "mode") {
    if (in.k == 0 && in.l == 0) throw error("initial mode (0,0) is constant");
    const double lx = g.lengths[0], ly = g.dimension == 2 ? g.lengths[1] : 1.0;
    auto f = GridFunction::sample(g, [&](double x, double y) {
      return in.scale * std::cos(in.k * std::numbers::pi * x / lx) * std::cos(in.l * std::numbers::pi * y / ly);
    });
    return project_mean_zero(std::move(f));
  }
  if (in.kind == "depth_ray") {
    if (!est.depth) throw error("depth_ray datum needs r- > p+");
    return in.scale * est.depth->best_field;
  }
  if (in.kind == "high_energy") {
    if (!est.depth) throw error("high_energy datum needs r- > p+");
    return construct_high_energy_datum(in.scale * est.depth->upper, p, r).u;
  }
  if (in.kind == "csv") {
    GridFunction f = build_function("csv:" + in.path, g);
    return f;
  }
  throw error("unknown datum kind " + in.kind);
}

// Envelope comparisons that apply to this run.
inline std::vector<EnvelopeSeries> compare_envelopes(const Trajectory& tr, const ExponentField& p,
                                                     const ExponentField& r, const RunEstimates& est,
                                                     const Verdict& v) {
  std::vector<EnvelopeSeries> out;
  const auto& s = tr.snapshots;
  if (s.empty()) return out;
  const EnergySnapshot& s0 = s.front();
  const double pm = p.p_minus(), pp = p.p_plus(), rm = r.p_minus(), rp = r.p_plus();
  const HypothesisReport h = check_hypotheses(p, r, p.grid().dimension);

  if (est.depth && est.B0 && v.regime == Regime::Subcritical && v.prediction == Prediction::Global &&
      tr.outcome.kind == OutcomeKind::GlobalUntilTend && s0.J > 0.0 && pp >= 2.0 - 1e-12 && s0.I > 0.0) {
    double d0 = 0.0;
    for (const auto& x : s)
      if (x.delta0 != kUndefinedRatio) d0 = std::max(d0, x.delta0);
    if (d0 > 0.0 && d0 < 1.0) {
      const DecayEnvelope env = decay_envelope(s0.J, p, r, est.B0->constant, d0, est.depth->upper);
      EnvelopeSeries e = make_series("energy_decay", to_string(env.energy.kind), true, env.energy.constants);
      EnvelopeSeries gr = make_series("gradient_decay", to_string(env.energy.kind), true, env.energy.constants);
      gr.constants["grad_factor"] = env.grad_factor;
      for (const auto& x : s) {
        e.add(x.t, x.J, env.energy(x.t));
        gr.add(x.t, x.grad_modular, env.grad_bound(x.t));
      }
      out.push_back(std::move(e));
      out.push_back(std::move(gr));
    }
  }

  if (rp < pm && est.B && est.B0) {
    const double b0sq = est.B0->constant * est.B0->constant;
    const Envelope env = sublinear_l2_envelope(s0.l2sq / b0sq, p, r, est.B->constant, est.B0->constant);
    EnvelopeSeries e = make_series("sublinear_l2", to_string(env.kind), true, env.constants);
    for (const auto& x : s) e.add(x.t, x.l2sq / b0sq, env(x.t));
    out.push_back(std::move(e));
  }

  if (h.sublinear_source_regime && rm < pp && s0.J < 0.0 && s0.l2sq > 0.0 && est.B0) {
    const L2Sandwich sw = negative_energy_l2_bounds(s0.l2sq, s0.J, p, r, est.B0->constant, p.grid().volume());
    EnvelopeSeries lo = make_series("negative_energy_lower", to_string(sw.lower.kind), false, sw.lower.constants);
    EnvelopeSeries hi = make_series("negative_energy_upper", to_string(sw.upper.kind), true, sw.upper.constants);
    for (const auto& x : s) {
      lo.add(x.t, x.l2sq, sw.lower(x.t));
      hi.add(x.t, x.l2sq, sw.upper(x.t));
    }
    out.push_back(std::move(lo));
    out.push_back(std::move(hi));
  }
  return out;
}

// First recorded time after which the concavity diagnostic stays positive.
inline std::optional<double> concavity_onset(const std::vector<ConcavityPoint>& c) {
  std::optional<double> onset;
  for (const auto& x : c) {
    if (x.diagnostic > 0.0) {
      if (!onset) onset = x.t;
    } else {
      onset.reset();
    }
  }
  return onset;
}

inline std::string agreement(Prediction p, OutcomeKind k) {
  if (p == Prediction::Undetermined) return "undetermined";
  if (k == OutcomeKind::StalledDt) return "unresolved";
  const bool blew = k == OutcomeKind::BlowupDetected;
  return (p == Prediction::Blowup) == blew ? "agree" : "contradiction";
}

inline RunResult run_pipeline(const RunConfig& cfg, std::uint64_t seed, bool integrate) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  json& rec = res.record;
  rec["id"] = cfg.name + "-s" + std::to_string(seed);
  rec["seed"] = seed;
  json echo = json::object();
  for (const auto& [k, v] : cfg.echo) echo[k] = v;
  rec["config"] = echo;
  try {
    const auto fields = detail::in_stage("fields", [&] {
      return std::pair{build_field(cfg.p, cfg.grid), build_field(cfg.r, cfg.grid)};
    });
    const ExponentField& p = fields.first;
    const ExponentField& r = fields.second;
    const HypothesisReport h = check_hypotheses(p, r, cfg.grid.dimension);
    json hyp = {{"standing_hypothesis", h.standing_hypothesis},
                {"r_plus_below_p_minus", h.r_plus_below_p_minus},
                {"sublinear_source_regime", h.sublinear_source_regime},
                {"p_minus", p.p_minus()},
                {"p_plus", p.p_plus()},
                {"r_minus", r.p_minus()},
                {"r_plus", r.p_plus()}};
    for (const auto& d : h.details) hyp["checks"].push_back({{"name", d.name}, {"lhs", d.lhs}, {"rhs", d.rhs}, {"holds", d.holds}});
    rec["hypotheses"] = hyp;

    RunEstimates est = detail::in_stage("estimates", [&] { return compute_estimates(cfg, p, r, seed); });
    json je;
    je["B0"] = {{"id", est.B0_id}, {"value", est.B0->constant}, {"trials", est.B0->trials}};
    je["B"] = {{"id", est.B_id}, {"value", est.B->constant}, {"trials", est.B->trials}};
    if (est.depth)
      je["depth"] = {{"id", est.depth_id},
                     {"upper", est.depth->upper},
                     {"lower_formula", est.depth->lower_formula},
                     {"witnesses", est.depth->witnesses},
                     {"embedding_id", est.B_id}};
    rec["estimates"] = je;

    const GridFunction u0 = detail::in_stage("initial", [&] { return make_initial(cfg, p, r, est, seed); });
    const EnergySnapshot s0 = snapshot(u0, p, r);
    rec["initial"] = {{"kind", cfg.initial.kind}, {"J0", s0.J}, {"I0", s0.I}, {"l2", std::sqrt(s0.l2sq)},
                      {"linf", u0.sup_norm()}, {"mean", mean(u0)}};

    const Verdict v = detail::in_stage("classify", [&] {
      ClassifierInputs ci;
      if (est.depth) {
        ci.depth_upper = est.depth->upper;
        ci.depth_lower = est.depth->lower_formula;
        if (s0.J > est.depth->upper + critical_band(est.depth->upper)) {
          ci.level_sample = sample_nehari(p, r, cfg.estimates.level_samples, seed,
                                          DepthOptions{cfg.estimates.max_mode, cfg.estimates.descent_steps});
          est.level_id = "nehari/" + std::to_string(seed) + "/" + std::to_string(cfg.estimates.level_samples);
        }
      }
      ci.B = est.B->constant;
      return classify(u0, p, r, ci);
    });
    json prov = json::object();
    for (const auto& [k, val] : v.constants) {
      if (k == "depth_upper" || k == "depth_lower") prov[k] = est.depth_id.empty() ? "none" : est.depth_id;
      else if (k == "alpha1" || k == "E1") prov[k] = est.B_id;
      else if (k == "lambda_s" || k == "Lambda_s") prov[k] = est.level_id;
      else prov[k] = "initial";
    }
    rec["verdict"] = {{"regime", to_string(v.regime)},
                      {"prediction", to_string(v.prediction)},
                      {"rule", v.rule},
                      {"certified", v.certified},
                      {"gradient_blowup_flag", v.gradient_blowup_flag},
                      {"constants", detail::constants_json(v.constants)},
                      {"provenance", prov},
                      {"notes", v.notes}};

    if (integrate) {
      res.trajectory = detail::in_stage("simulate", [&] { return simulate(u0, p, r, cfg.solver); });
      const Trajectory& tr = *res.trajectory;
      rec["outcome"] = {{"kind", to_string(tr.outcome.kind)},
                        {"t", tr.outcome.t},
                        {"steps", tr.step_count},
                        {"rejected", tr.rejected},
                        {"max_residual_ratio", tr.max_residual_ratio},
                        {"final_linf", tr.linf.back()}};
      rec["agreement"] = agreement(v.prediction, tr.outcome.kind);
      const AuditReport a =
          audit_trajectory(tr, est.depth ? std::optional<double>(est.depth->upper) : std::nullopt);
      rec["audit"] = {{"energy_monotone", a.energy_monotone},
                      {"max_energy_increase", a.max_energy_increase},
                      {"max_identity_error", a.max_identity_error},
                      {"identity_points", a.identity_points},
                      {"sign_checked", a.sign_checked},
                      {"sign_persistent", a.sign_persistent},
                      {"max_mean_drift", a.max_mean_drift}};
      if (tr.outcome.kind == OutcomeKind::BlowupDetected) {
        const auto c = blowup_functional(tr, r.p_minus());
        const auto onset = concavity_onset(c);
        rec["concavity"] = {{"onset", onset ? json(*onset) : json(nullptr)}, {"points", c.size()}};
        if (est.depth) {
          const auto u = unstable_energy_check(tr, r.p_minus(), est.depth->upper);
          rec["unstable_energy"] = {{"checked", u.checked}, {"violations", u.violations},
                                    {"max_excess", u.max_excess}, {"depth_id", est.depth_id}};
        }
      }
      res.envelopes = detail::in_stage("envelopes", [&] { return compare_envelopes(tr, p, r, est, v); });
      json envs = json::array();
      for (const auto& e : res.envelopes)
        envs.push_back({{"name", e.name}, {"kind", e.kind}, {"upper", e.upper},
                        {"constants", detail::constants_json(e.constants)}, {"worst_ratio", e.worst_ratio},
                        {"passes", e.passes()}});
      rec["envelopes"] = envs;
      rec["trajectory_ref"] = "trajectory.csv";
      if (rec["agreement"] == "contradiction") res.exit_code = 4;
    }
  } catch (const stage_error& e) {
    rec["error"] = {{"stage", e.stage()}, {"message", e.what()}};
    res.exit_code = 3;
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline void write_envelopes_csv(std::ostream& os, const std::vector<EnvelopeSeries>& envs) {
  os << "envelope,t,observed,bound\n";
  char buf[256];
  for (const auto& e : envs)
    for (std::size_t k = 0; k < e.t.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", e.name.c_str(), e.t[k], e.observed[k], e.bound[k]);
      os << buf;
    }
}

// Writes <out>/<id>/{record.json, trajectory.csv, envelopes.csv}; wall time
// goes to timing.json so the other files are reproducible byte for byte.
inline std::filesystem::path persist_run(const RunResult& res, const std::filesystem::path& out) {
  const std::filesystem::path dir = out / res.record["id"].get<std::string>();
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "record.json") << res.record.dump(2) << '\n';
  if (res.trajectory) {
    std::ofstream t(dir / "trajectory.csv");
    write_trajectory_csv(t, *res.trajectory);
    std::ofstream e(dir / "envelopes.csv");
    write_envelopes_csv(e, res.envelopes);
  }
  std::ofstream(dir / "timing.json") << json{{"wall_time_s", res.wall_time}}.dump(2) << '\n';
  return dir;
}

// One summary row per stored record under out.
inline std::vector<json> collect_records(const std::filesystem::path& out) {
  std::vector<std::filesystem::path> dirs;
  if (std::filesystem::is_directory(out))
    for (const auto& e : std::filesystem::directory_iterator(out))
      if (std::filesystem::exists(e.path() / "record.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<json> recs;
  for (const auto& d : dirs) {
    std::ifstream in(d / "record.json");
    recs.push_back(json::parse(in));
  }
  return recs;
}

inline void write_summary_csv(std::ostream& os, const std::vector<json>& recs) {
  os << "id,regime,prediction,rule,outcome,agreement,J0,I0\n";
  for (const auto& r : recs) {
    auto get = [&](const char* a, const char* b) -> std::string {
      if (!r.contains(a) || !r[a].contains(b)) return "";
      const auto& x = r[a][b];
      return x.is_string() ? x.get<std::string>() : x.dump();
    };
    os << r.value("id", "") << ',' << get("verdict", "regime") << ',' << get("verdict", "prediction") << ','
       << get("verdict", "rule") << ',' << get("outcome", "kind") << ',' << r.value("agreement", "") << ','
       << get("initial", "J0") << ',' << get("initial", "I0") << '\n';
  }
}

}  // namespace pxlab
