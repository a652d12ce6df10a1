#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "solver.hpp"

namespace pxlab {

class config_error : public error {
 public:
  using error::error;
};

struct InitialDatum {
  // zero | witness | mode | depth_ray | high_energy | csv
  std::string kind = "zero";
  std::size_t index = 0;  // witness
  int k = 1, l = 0;       // mode
  double scale = 1.0;     // amplitude, ray factor or energy multiple of the depth
  std::string path;       // csv
};

struct EstimateSettings {
  std::size_t depth_trials = 8;
  std::size_t embedding_trials = 16;
  std::size_t level_samples = 8;
  int max_mode = 4;
  int descent_steps = 50;
};

struct NormSettings {
  std::string field;
  std::string exponent;
  double tol = 1e-12;
};

struct RunConfig {
  std::string name = "run";
  Grid grid = Grid::square(64, 64);
  std::string p = "const:2";
  std::string r = "const:4";
  InitialDatum initial;
  SolverConfig solver;
  EstimateSettings estimates;
  NormSettings norm;
  std::uint64_t seed = 1;
  std::vector<std::pair<std::string, std::string>> echo;  // every key as written, "section.key"
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw config_error(key + ": expected a number, got '" + v + "'");
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw config_error(key + ": expected an integer, got '" + v + "'");
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < 0) throw config_error(key + ": must be non-negative");
  return static_cast<std::size_t>(x);
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is, const std::string& name = "run") {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw config_error("line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  c.name = name;
  int nx = 64, ny = 64, dim = 2;
  double lx = 1.0, ly = 1.0;
  bool ny_given = false;

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> keys = {
      {"run.seed", [&](auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(detail::parse_count(k, v)); }},
      {"grid.nx", [&](auto& k, auto& v) { nx = static_cast<int>(detail::parse_int(k, v)); }},
      {"grid.ny",
       [&](auto& k, auto& v) {
         ny = static_cast<int>(detail::parse_int(k, v));
         ny_given = true;
       }},
      {"grid.lx", [&](auto& k, auto& v) { lx = detail::parse_real(k, v); }},
      {"grid.ly", [&](auto& k, auto& v) { ly = detail::parse_real(k, v); }},
      {"grid.dimension", [&](auto& k, auto& v) { dim = static_cast<int>(detail::parse_int(k, v)); }},
      {"exponents.p", [&](auto&, auto& v) { c.p = v; }},
      {"exponents.r", [&](auto&, auto& v) { c.r = v; }},
      {"initial.kind", [&](auto&, auto& v) { c.initial.kind = v; }},
      {"initial.index", [&](auto& k, auto& v) { c.initial.index = detail::parse_count(k, v); }},
      {"initial.k", [&](auto& k, auto& v) { c.initial.k = static_cast<int>(detail::parse_int(k, v)); }},
      {"initial.l", [&](auto& k, auto& v) { c.initial.l = static_cast<int>(detail::parse_int(k, v)); }},
      {"initial.scale", [&](auto& k, auto& v) { c.initial.scale = detail::parse_real(k, v); }},
      {"initial.path", [&](auto&, auto& v) { c.initial.path = v; }},
      {"solver.dt_init", [&](auto& k, auto& v) { c.solver.dt_init = detail::parse_real(k, v); }},
      {"solver.dt_min", [&](auto& k, auto& v) { c.solver.dt_min = detail::parse_real(k, v); }},
      {"solver.dt_max", [&](auto& k, auto& v) { c.solver.dt_max = detail::parse_real(k, v); }},
      {"solver.t_end", [&](auto& k, auto& v) { c.solver.t_end = detail::parse_real(k, v); }},
      {"solver.energy_tol", [&](auto& k, auto& v) { c.solver.energy_tol = detail::parse_real(k, v); }},
      {"solver.blowup_threshold", [&](auto& k, auto& v) { c.solver.blowup_threshold = detail::parse_real(k, v); }},
      {"solver.delta", [&](auto& k, auto& v) { c.solver.delta = detail::parse_real(k, v); }},
      {"solver.record_every",
       [&](auto& k, auto& v) { c.solver.record_every = static_cast<int>(detail::parse_int(k, v)); }},
      {"solver.max_steps", [&](auto& k, auto& v) { c.solver.max_steps = static_cast<long>(detail::parse_int(k, v)); }},
      {"estimates.depth_trials", [&](auto& k, auto& v) { c.estimates.depth_trials = detail::parse_count(k, v); }},
      {"estimates.embedding_trials",
       [&](auto& k, auto& v) { c.estimates.embedding_trials = detail::parse_count(k, v); }},
      {"estimates.level_samples", [&](auto& k, auto& v) { c.estimates.level_samples = detail::parse_count(k, v); }},
      {"estimates.max_mode",
       [&](auto& k, auto& v) { c.estimates.max_mode = static_cast<int>(detail::parse_int(k, v)); }},
      {"estimates.descent_steps",
       [&](auto& k, auto& v) { c.estimates.descent_steps = static_cast<int>(detail::parse_int(k, v)); }},
      {"norm.field", [&](auto&, auto& v) { c.norm.field = v; }},
      {"norm.exponent", [&](auto&, auto& v) { c.norm.exponent = v; }},
      {"norm.tol", [&](auto& k, auto& v) { c.norm.tol = detail::parse_real(k, v); }},
  };

  for (const auto& [section, body] : pt) {
    if (body.empty() && !body.data().empty())
      throw config_error("key '" + section + "' must appear inside a [section]");
    for (const auto& [key, val] : body) {
      const std::string full = section + "." + key;
      const auto it = keys.find(full);
      if (it == keys.end()) throw config_error("unknown key '" + key + "' in [" + section + "]");
      const std::string v = val.get_value<std::string>();
      for (const auto& e : c.echo)
        if (e.first == full) throw config_error("duplicate key '" + key + "' in [" + section + "]");
      it->second(full, v);
      c.echo.emplace_back(full, v);
    }
  }

  if (nx < 2 || (dim == 2 && ny < 2)) throw config_error("grid: need at least 2 cells per axis");
  if (!(lx > 0.0 && ly > 0.0)) throw config_error("grid: lengths must be positive");
  if (dim == 1 && ny_given) throw config_error("grid.ny given for a one-dimensional grid");
  if (dim == 1)
    c.grid = Grid::line(nx, lx);
  else if (dim == 2)
    c.grid = Grid::square(nx, ny, lx, ly);
  else
    throw config_error("grid.dimension must be 1 or 2");
  static const char* kinds[] = {"zero", "witness", "mode", "depth_ray", "high_energy", "csv"};
  if (std::find(std::begin(kinds), std::end(kinds), c.initial.kind) == std::end(kinds))
    throw config_error("initial.kind: unknown datum kind '" + c.initial.kind + "'");
  if (c.solver.record_every < 1) throw config_error("solver.record_every must be >= 1");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config " + path);
  return parse_config(in, std::filesystem::path(path).stem().string());
}

}  // namespace pxlab
