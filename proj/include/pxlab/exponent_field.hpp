#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "grid.hpp"

namespace pxlab {

// Variable exponent sampled at cell centers; every value is > 1.
class ExponentField {
 public:
  ExponentField() = default;
  ExponentField(const Grid& g, std::vector<double> v, std::string label = "tabulated")
      : grid_(g), values_(std::move(v)), label_(std::move(label)) {
    if (values_.size() != grid_.size()) throw error("exponent field size mismatch");
    minus_ = std::numeric_limits<double>::infinity();
    plus_ = -minus_;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const double q = values_[k];
      if (!std::isfinite(q) || !(q > 1.0)) {
        const auto c = grid_.center(k);
        std::ostringstream os;
        os << "exponent must exceed 1: value " << q << " at cell " << k << " (x=" << c[0];
        if (grid_.dimension == 2) os << ", y=" << c[1];
        os << ")";
        throw error(os.str());
      }
      minus_ = std::min(minus_, q);
      plus_ = std::max(plus_, q);
    }
  }

  static ExponentField constant(const Grid& g, double v) {
    std::ostringstream os;
    os << "const:" << v;
    return ExponentField(g, std::vector<double>(g.size(), v), os.str());
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::size_t size() const { return values_.size(); }
  double p_minus() const { return minus_; }
  double p_plus() const { return plus_; }
  const std::string& label() const { return label_; }
  bool is_constant() const { return minus_ == plus_; }

  // Pointwise conjugate q' = q/(q-1).
  ExponentField conjugate() const {
    std::vector<double> v(values_.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = values_[k] / (values_[k] - 1.0);
    return ExponentField(grid_, std::move(v), label_ + "'");
  }

 private:
  Grid grid_;
  std::vector<double> values_;
  double minus_ = 0.0, plus_ = 0.0;
  std::string label_;
};

inline GridFunction px_flux_divergence(const GridFunction& u, const ExponentField& p,
                                       double delta = 1e-8) {
  require_same_grid(u.grid(), p.grid());
  return px_flux_divergence_from(u, p.values(), delta);
}

// ---------------------------------------------------------------------------
// CSV: "# grid nx [ny] Lx [Ly]" header, then values row-major (one grid row
// per line).

inline void write_grid_csv(std::ostream& os, const Grid& g, const std::vector<double>& v) {
  os << "# grid " << g.nx();
  if (g.dimension == 2) os << ' ' << g.ny();
  char buf[64];
  std::snprintf(buf, sizeof buf, " %.17g", g.lengths[0]);
  os << buf;
  if (g.dimension == 2) {
    std::snprintf(buf, sizeof buf, " %.17g", g.lengths[1]);
    os << buf;
  }
  os << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[g.index(i, j)]);
      if (i) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

inline std::pair<Grid, std::vector<double>> read_grid_csv(std::istream& is) {
  std::string line;
  Grid g;
  bool have_header = false;
  std::vector<double> vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tag;
      hs >> tag;
      if (tag != "grid") continue;
      std::vector<double> nums;
      double x;
      while (hs >> x) nums.push_back(x);
      if (nums.size() == 2)
        g = Grid::line(static_cast<int>(nums[0]), nums[1]);
      else if (nums.size() == 4)
        g = Grid::square(static_cast<int>(nums[0]), static_cast<int>(nums[1]), nums[2], nums[3]);
      else
        throw error("malformed grid header: " + line);
      have_header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw error("bad number in grid csv: '" + cell + "'");
      }
    }
  }
  if (!have_header) throw error("grid csv lacks '# grid' header");
  if (vals.size() != g.size()) throw error("grid csv value count does not match header");
  return {g, std::move(vals)};
}

inline ExponentField read_exponent_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open exponent table " + path);
  auto [g, v] = read_grid_csv(in);
  return ExponentField(g, std::move(v), "csv:" + path);
}

// ---------------------------------------------------------------------------
// Closed-form exponent descriptions:
//   const:<v>
//   affine:<a>[+<b>x][+<c>y]
//   sin:<a>+<b>*sin(<k>pi x)      ("π" accepted for "pi")

// Values of a field description on the grid.
inline std::vector<double> sample_description(const std::string& desc_in, const Grid& g) {
  std::string desc;
  for (std::size_t i = 0; i < desc_in.size(); ++i) {
    if (desc_in.compare(i, 2, "\xCF\x80") == 0) {  // UTF-8 pi
      desc += "pi";
      ++i;
    } else if (!std::isspace(static_cast<unsigned char>(desc_in[i]))) {
      desc += desc_in[i];
    }
  }
  static const std::string num = R"(([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))";
  std::smatch m;
  if (std::regex_match(desc, m, std::regex("const:" + num))) return std::vector<double>(g.size(), std::stod(m[1]));
  if (std::regex_match(desc, m, std::regex("affine:" + num + "(?:" + num + "\\*?x)?(?:" + num + "\\*?y)?"))) {
    const double a = std::stod(m[1]);
    const double b = m[2].matched ? std::stod(m[2]) : 0.0;
    const double c = m[3].matched ? std::stod(m[3]) : 0.0;
    return GridFunction::sample(g, [&](double x, double y) { return a + b * x + c * y; }).values();
  }
  if (std::regex_match(desc, m,
                       std::regex("sin:" + num + num + "\\*?sin\\(" + num + "?\\*?pi\\*?x\\)"))) {
    const double a = std::stod(m[1]), b = std::stod(m[2]);
    const double k = m[3].matched ? std::stod(m[3]) : 1.0;
    return GridFunction::sample(g, [&](double x, double) { return a + b * std::sin(k * std::numbers::pi * x); })
        .values();
  }
  if (desc.rfind("csv:", 0) == 0) {
    std::ifstream in(desc.substr(4));
    if (!in) throw error("cannot open field table " + desc.substr(4));
    auto [tg, v] = read_grid_csv(in);
    if (!(tg == g)) throw error("field table grid differs from run grid: " + desc);
    return v;
  }
  throw error("unrecognised field description '" + desc_in + "'");
}

inline ExponentField build_field(const std::string& desc, const Grid& g) {
  return ExponentField(g, sample_description(desc, g), desc);
}

inline GridFunction build_function(const std::string& desc, const Grid& g) {
  GridFunction f(g);
  f.values() = sample_description(desc, g);
  return f;
}

// ---------------------------------------------------------------------------
// Log-Hoelder regularity probe.

struct RegularityReport {
  double max_log_modulus = 0.0;
  std::size_t pairs_checked = 0;
  double cap = 10.0;
  bool passes = true;
  std::size_t worst_a = 0, worst_b = 0;
};

inline RegularityReport check_log_holder(const ExponentField& q, std::size_t pair_budget,
                                         std::uint64_t seed = 0, double cap = 10.0) {
  const Grid& g = q.grid();
  RegularityReport rep;
  rep.cap = cap;
  auto visit = [&](std::size_t a, std::size_t b) {
    const auto ca = g.center(a), cb = g.center(b);
    const double dist = std::hypot(ca[0] - cb[0], ca[1] - cb[1]);
    ++rep.pairs_checked;
    if (!(dist < 1.0) || dist == 0.0) return;
    const double mod = std::abs(q[a] - q[b]) * std::log(1.0 / dist);
    if (mod > rep.max_log_modulus) {
      rep.max_log_modulus = mod;
      rep.worst_a = a;
      rep.worst_b = b;
    }
  };
  const std::size_t n = g.size();
  const std::size_t all_pairs = n * (n - 1) / 2;
  if (all_pairs <= pair_budget) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) visit(a, b);
  } else {
    // Nearest neighbours first, then random pairs.
    for (int j = 0; j < g.ny() && rep.pairs_checked < pair_budget; ++j)
      for (int i = 0; i < g.nx() && rep.pairs_checked < pair_budget; ++i) {
        if (i + 1 < g.nx()) visit(g.index(i, j), g.index(i + 1, j));
        if (g.dimension == 2 && j + 1 < g.ny()) visit(g.index(i, j), g.index(i, j + 1));
      }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    while (rep.pairs_checked < pair_budget) {
      const std::size_t a = pick(rng), b = pick(rng);
      if (a != b) visit(a, b);
    }
  }
  rep.passes = rep.max_log_modulus <= cap;
  return rep;
}

// ---------------------------------------------------------------------------
// Structural hypotheses on (p, r, N).

struct InequalityCheck {
  std::string name;
  double lhs = 0.0, rhs = 0.0;
  bool holds = false;
};

struct HypothesisReport {
  bool standing_hypothesis = false;
  bool r_plus_below_p_minus = false;
  bool sublinear_source_regime = false;
  bool has_critical_sobolev = false;
  double critical_sobolev = std::numeric_limits<double>::infinity();
  std::vector<InequalityCheck> details;
};

inline HypothesisReport check_hypotheses(const ExponentField& p, const ExponentField& r, int N) {
  const double pm = p.p_minus(), pp = p.p_plus(), rm = r.p_minus(), rp = r.p_plus();
  HypothesisReport h;
  auto add = [&](const std::string& name, double lhs, double rhs, bool holds) {
    h.details.push_back({name, lhs, rhs, holds});
    return holds;
  };
  const double lower = std::max(1.0, 2.0 * N / (N + 2.0));
  bool ok = add("max(1,2N/(N+2)) < p-", lower, pm, lower < pm);
  ok = add("p- < N", pm, N, pm < N) && ok;
  const double rlow = std::max(pp, 2.0);
  ok = add("max(p+,2) < r-", rlow, rm, rlow < rm) && ok;
  if (pm < N) {
    h.has_critical_sobolev = true;
    h.critical_sobolev = N * pm / (N - pm);
  }
  ok = add("r+ <= N p-/(N-p-)", rp, h.critical_sobolev, h.has_critical_sobolev && rp <= h.critical_sobolev) && ok;
  h.standing_hypothesis = ok;
  h.r_plus_below_p_minus = add("r+ < p-", rp, pm, rp < pm);
  const bool a = add("r- <= min(p+,2)", rm, std::min(pp, 2.0), rm <= std::min(pp, 2.0));
  const bool b = add("r+ < 2", rp, 2.0, rp < 2.0);
  h.sublinear_source_regime = a && b;
  return h;
}

}  // namespace pxlab
