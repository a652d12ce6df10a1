#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace pxlab {

// Neumann-compatible cosine modes cos(k pi x/Lx) cos(l pi y/Ly), (k,l) != (0,0).
class ModeBasis {
 public:
  ModeBasis(const Grid& g, int max_mode) : grid_(g) {
    const int ky = g.dimension == 2 ? max_mode : 0;
    for (int l = 0; l <= ky; ++l)
      for (int k = 0; k <= max_mode; ++k)
        if (k || l) modes_.emplace_back(k, l);
    auto table = [&](int n, double h, double L, int kmax) {
      std::vector<std::vector<double>> t(static_cast<std::size_t>(kmax) + 1, std::vector<double>(n));
      for (int k = 0; k <= kmax; ++k)
        for (int i = 0; i < n; ++i) t[k][i] = std::cos(k * std::numbers::pi * (i + 0.5) * h / L);
      return t;
    };
    cx_ = table(g.nx(), g.spacing(0), g.lengths[0], max_mode);
    if (g.dimension == 2) cy_ = table(g.ny(), g.spacing(1), g.lengths[1], ky);
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<std::pair<int, int>>& modes() const { return modes_; }

  GridFunction synthesize(const std::vector<double>& c) const {
    GridFunction u(grid_);
    const int nx = grid_.nx(), ny = grid_.ny();
    for (std::size_t m = 0; m < modes_.size(); ++m) {
      if (c[m] == 0.0) continue;
      const auto [k, l] = modes_[m];
      for (int j = 0; j < ny; ++j) {
        const double wy = c[m] * (grid_.dimension == 2 ? cy_[l][j] : 1.0);
        const std::size_t row = grid_.index(0, j);
        for (int i = 0; i < nx; ++i) u[row + i] += wy * cx_[k][i];
      }
    }
    return project_mean_zero(std::move(u));
  }

 private:
  Grid grid_;
  std::vector<std::pair<int, int>> modes_;
  std::vector<std::vector<double>> cx_, cy_;
};

struct Witness {
  std::string id;
  std::vector<double> coeffs;
};

// Deterministic witness stream: witness i depends only on (seed, i), so a
// longer stream extends a shorter one.
class WitnessSource {
 public:
  WitnessSource(const Grid& g, std::uint64_t seed, int max_mode = 4)
      : basis_(g, max_mode), seed_(seed) {}

  const ModeBasis& basis() const { return basis_; }

  std::mt19937_64 stream(std::size_t i, std::uint64_t salt = 0) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
  }

  Witness make(std::size_t i) const {
    auto rng = stream(i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Log-uniform overall amplitude, mode weights decaying with frequency,
    // random sparsity so single modes and mixtures both occur.
    const double amp = std::exp(std::log(1e-2) + unit(rng) * (std::log(1e2) - std::log(1e-2)));
    const double keep = 0.25 + 0.75 * unit(rng);
    Witness w;
    w.id = "w" + std::to_string(seed_) + "-" + std::to_string(i);
    w.coeffs.assign(basis_.size(), 0.0);
    bool any = false;
    for (std::size_t m = 0; m < basis_.size(); ++m) {
      const double z = normal(rng);
      if (unit(rng) > keep) continue;
      const auto [k, l] = basis_.modes()[m];
      w.coeffs[m] = amp * z / (1.0 + k * k + l * l);
      any = true;
    }
    if (!any) w.coeffs[i % basis_.size()] = amp;
    return w;
  }

  GridFunction field(const Witness& w) const { return basis_.synthesize(w.coeffs); }

 private:
  ModeBasis basis_;
  std::uint64_t seed_;
};

// (1+1) random search over mode coefficients. `score` is maximised; it may
// return -inf to reject a candidate.
template <class Score>
std::pair<std::vector<double>, double> perturbation_search(std::vector<double> c, double value,
                                                           Score&& score, int iterations,
                                                           std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double sigma = 0.3;
  for (int it = 0; it < iterations; ++it) {
    double scale = 0.0;
    for (double x : c) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) break;
    std::vector<double> trial = c;
    for (auto& x : trial) x += sigma * scale * normal(rng);
    const double v = score(trial);
    if (v > value) {
      c = std::move(trial);
      value = v;
      sigma = std::min(1.0, sigma * 1.5);
    } else {
      sigma = std::max(1e-4, sigma * 0.7);
    }
  }
  return {std::move(c), value};
}

}  // namespace pxlab
