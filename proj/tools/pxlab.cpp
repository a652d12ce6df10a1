#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pxlab/poincare.hpp"
#include "pxlab/runner.hpp"

namespace fs = std::filesystem;
using namespace pxlab;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config, "INI run configuration");
  if (needs_config) opt->required();
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "seed overriding [run] seed");
  cmd->add_flag("--quiet", c.quiet, "suppress the summary");
}

int run_cmd(const Common& c, bool integrate) {
  const RunConfig cfg = load_config(c.config);
  const std::uint64_t seed = c.seed.value_or(cfg.seed);
  const RunResult res = run_pipeline(cfg, seed, integrate);
  if (!c.out.empty()) persist_run(res, c.out);
  if (!c.quiet) {
    const json& r = res.record;
    if (integrate && r.contains("outcome"))
      std::cout << r["id"].get<std::string>() << ": verdict " << r["verdict"]["prediction"].get<std::string>()
                << " (" << r["verdict"]["rule"].get<std::string>() << "), outcome "
                << r["outcome"]["kind"].get<std::string>() << " at t=" << r["outcome"]["t"].get<double>() << ", "
                << r["agreement"].get<std::string>() << '\n';
    else
      std::cout << r.dump(2) << '\n';
  }
  if (res.record.contains("error"))
    std::cerr << "pipeline error in stage " << res.record["error"]["stage"].get<std::string>() << ": "
              << res.record["error"]["message"].get<std::string>() << '\n';
  return res.exit_code;
}

int depth_cmd(const Common& c) {
  const RunConfig cfg = load_config(c.config);
  const std::uint64_t seed = c.seed.value_or(cfg.seed);
  const ExponentField p = build_field(cfg.p, cfg.grid), r = build_field(cfg.r, cfg.grid);
  const EmbeddingEstimate B =
      estimate_embedding(p, r, cfg.estimates.embedding_trials, seed, EmbeddingKind::B, {cfg.estimates.max_mode});
  const DepthEstimate d = estimate_depth(p, r, cfg.estimates.depth_trials, seed, B,
                                         {cfg.estimates.max_mode, cfg.estimates.descent_steps});
  const json j = {{"upper", d.upper},
                  {"lower_formula", d.lower_formula},
                  {"witnesses", d.witnesses},
                  {"best_witness", d.best_witness},
                  {"B", B.constant},
                  {"embedding_id", d.embedding_id},
                  {"seed", seed}};
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream(fs::path(c.out) / "depth.json") << j.dump(2) << '\n';
  }
  if (!c.quiet) std::cout << j.dump(2) << '\n';
  return 0;
}

int norm_cmd(const Common& c) {
  const RunConfig cfg = load_config(c.config);
  if (cfg.norm.field.empty() || cfg.norm.exponent.empty())
    throw config_error("[norm] needs both 'field' and 'exponent'");
  const GridFunction f = build_function(cfg.norm.field, cfg.grid);
  const ExponentField q = build_field(cfg.norm.exponent, cfg.grid);
  const NormResult n = luxemburg_norm(f, q, cfg.norm.tol);
  const json j = {{"value", n.value}, {"iterations", n.iterations}, {"residual", n.residual},
                  {"modular", modular(f, q)}};
  if (!c.quiet) std::cout << j.dump(2) << '\n';
  return 0;
}

int ode_cmd(const Common& c) {
  const auto rows = ode_sweep();
  std::size_t fails = 0;
  double worst = 0.0;
  for (const auto& v : rows) {
    fails += v.passes ? 0 : 1;
    worst = std::max(worst, v.max_violation / (1.0 + v.scale));
  }
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / "ode_sweep.csv");
    write_ode_csv(os, rows);
  }
  if (!c.quiet)
    std::printf("%zu cells, %zu failing, worst scaled violation %.3g\n", rows.size(), fails, worst);
  return fails ? 4 : 0;
}

int poincare_cmd(const Common& c) {
  const auto rows = quotient_sweep({1.0, 2.0, 10.0, 1e2, 1e3, 1e4, 1e6});
  bool ok = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ok = ok && check_quotient_row(rows[k]).all();
    if (k > 0 && rows[k].eps >= 10.0) ok = ok && rows[k].quotient < rows[k - 1].quotient;
  }
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / "poincare.csv");
    write_quotient_csv(os, rows);
  }
  if (!c.quiet) write_quotient_csv(std::cout, rows);
  return ok ? 0 : 4;
}

int report_cmd(const Common& c) {
  if (c.out.empty()) throw config_error("report needs --out <dir> holding run records");
  const auto recs = collect_records(c.out);
  std::ofstream os(fs::path(c.out) / "summary.csv");
  write_summary_csv(os, recs);
  if (!c.quiet) write_summary_csv(std::cout, recs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-exponent parabolic lab: potential-well classification and simulation"};
  app.require_subcommand(1);
  Common c;
  auto* sim = app.add_subcommand("simulate", "classify, integrate and audit one configured run");
  auto* cls = app.add_subcommand("classify", "classify the configured datum without time integration");
  auto* dep = app.add_subcommand("depth", "estimate the potential-well depth");
  auto* nrm = app.add_subcommand("norm", "Luxemburg norm of a configured field");
  auto* ode = app.add_subcommand("ode-verify", "check the comparison-lemma envelopes against RK4");
  auto* poi = app.add_subcommand("poincare", "radial Poincare quotient sweep");
  auto* rep = app.add_subcommand("report", "summarise stored run records");
  for (auto* s : {sim, cls, dep, nrm}) add_common(s, c, true);
  for (auto* s : {ode, poi, rep}) add_common(s, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (sim->parsed()) return run_cmd(c, true);
    if (cls->parsed()) return run_cmd(c, false);
    if (dep->parsed()) return depth_cmd(c);
    if (nrm->parsed()) return norm_cmd(c);
    if (ode->parsed()) return ode_cmd(c);
    if (poi->parsed()) return poincare_cmd(c);
    if (rep->parsed()) return report_cmd(c);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
