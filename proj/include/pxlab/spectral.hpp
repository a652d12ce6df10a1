#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "grid.hpp"

namespace pxlab {

// Cell-centered cosine transform; its basis diagonalises the Neumann
// second-difference operator with eigenvalues (4/h^2) sin^2(k pi / 2n).
class CosineTransform {
 public:
  explicit CosineTransform(const Grid& g) : grid_(g) {
    build(g.nx(), g.spacing(0), cx_, mx_);
    if (g.dimension == 2)
      build(g.ny(), g.spacing(1), cy_, my_);
    else
      my_.assign(1, 0.0);
  }

  const Grid& grid() const { return grid_; }
  double eigenvalue(int k, int l = 0) const { return mx_[k] + my_[l]; }

  // Coefficients c_kl with u = sum c_kl cos_k(x) cos_l(y).
  std::vector<double> forward(const GridFunction& u) const {
    const int nx = grid_.nx(), ny = grid_.ny();
    std::vector<double> t(u.size()), c(u.size());
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < nx; ++k) {
        double a = 0.0;
        for (int i = 0; i < nx; ++i) a += u[grid_.index(i, j)] * cx_[k][i];
        t[grid_.index(k, j)] = a * (k ? 2.0 : 1.0) / nx;
      }
    if (grid_.dimension == 1) return t;
    for (int l = 0; l < ny; ++l)
      for (int k = 0; k < nx; ++k) {
        double a = 0.0;
        for (int j = 0; j < ny; ++j) a += t[grid_.index(k, j)] * cy_[l][j];
        c[grid_.index(k, l)] = a * (l ? 2.0 : 1.0) / ny;
      }
    return c;
  }

  GridFunction inverse(const std::vector<double>& c) const {
    const int nx = grid_.nx(), ny = grid_.ny();
    std::vector<double> t(c.size());
    if (grid_.dimension == 2) {
      for (int j = 0; j < ny; ++j)
        for (int k = 0; k < nx; ++k) {
          double a = 0.0;
          for (int l = 0; l < ny; ++l) a += c[grid_.index(k, l)] * cy_[l][j];
          t[grid_.index(k, j)] = a;
        }
    } else {
      t = c;
    }
    GridFunction u(grid_);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double a = 0.0;
        for (int k = 0; k < nx; ++k) a += t[grid_.index(k, j)] * cx_[k][i];
        u[grid_.index(i, j)] = a;
      }
    return u;
  }

  // (I + s A)^{-1} u with A the Neumann second-difference operator.
  GridFunction smooth(const GridFunction& u, double s) const {
    auto c = forward(u);
    const int nx = grid_.nx(), ny = grid_.ny();
    for (int l = 0; l < ny; ++l)
      for (int k = 0; k < nx; ++k) c[grid_.index(k, l)] /= 1.0 + s * eigenvalue(k, l);
    return inverse(c);
  }

 private:
  static void build(int n, double h, std::vector<std::vector<double>>& tab, std::vector<double>& eig) {
    tab.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
    eig.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < n; ++i) tab[k][i] = std::cos(k * std::numbers::pi * (i + 0.5) / n);
      const double s = std::sin(k * std::numbers::pi / (2.0 * n));
      eig[k] = 4.0 * s * s / (h * h);
    }
  }

  Grid grid_;
  std::vector<std::vector<double>> cx_, cy_;
  std::vector<double> mx_, my_;
};

}  // namespace pxlab
