#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pxlab {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform cell-centered grid on [0,Lx] or [0,Lx]x[0,Ly].
struct Grid {
  int dimension = 1;
  std::array<int, 2> cells{2, 1};
  std::array<double, 2> lengths{1.0, 1.0};

  Grid() = default;

  static Grid line(int nx, double lx = 1.0) {
    Grid g;
    g.dimension = 1;
    g.cells = {nx, 1};
    g.lengths = {lx, 1.0};
    g.validate();
    return g;
  }

  static Grid square(int nx, int ny, double lx = 1.0, double ly = 1.0) {
    Grid g;
    g.dimension = 2;
    g.cells = {nx, ny};
    g.lengths = {lx, ly};
    g.validate();
    return g;
  }

  void validate() const {
    if (dimension != 1 && dimension != 2)
      throw error("grid dimension must be 1 or 2");
    for (int a = 0; a < dimension; ++a) {
      if (cells[a] < 2) throw error("grid needs at least 2 cells per axis");
      if (!(lengths[a] > 0.0)) throw error("grid lengths must be positive");
    }
  }

  std::size_t size() const {
    return static_cast<std::size_t>(cells[0]) *
           static_cast<std::size_t>(dimension == 2 ? cells[1] : 1);
  }
  int nx() const { return cells[0]; }
  int ny() const { return dimension == 2 ? cells[1] : 1; }
  double spacing(int axis) const { return lengths[axis] / cells[axis]; }
  double cell_volume() const {
    double v = spacing(0);
    if (dimension == 2) v *= spacing(1);
    return v;
  }
  double volume() const {
    return dimension == 2 ? lengths[0] * lengths[1] : lengths[0];
  }
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx()) +
           static_cast<std::size_t>(i);
  }
  std::array<double, 2> center(std::size_t k) const {
    const int i = static_cast<int>(k % static_cast<std::size_t>(nx()));
    const int j = static_cast<int>(k / static_cast<std::size_t>(nx()));
    return {(i + 0.5) * spacing(0), dimension == 2 ? (j + 0.5) * spacing(1) : 0.0};
  }

  bool operator==(const Grid& o) const {
    if (dimension != o.dimension || cells[0] != o.cells[0] || lengths[0] != o.lengths[0])
      return false;
    return dimension == 1 || (cells[1] == o.cells[1] && lengths[1] == o.lengths[1]);
  }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw error("fields live on different grids");
}

// Scalar values, one per cell.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const Grid& g, double fill = 0.0) : grid_(g), values_(g.size(), fill) {}
  GridFunction(const Grid& g, std::vector<double> v) : grid_(g), values_(std::move(v)) {
    if (values_.size() != grid_.size()) throw error("grid function size mismatch");
  }

  template <class F>
  static GridFunction sample(const Grid& g, F&& f) {
    GridFunction out(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const auto c = g.center(k);
      out.values_[k] = f(c[0], c[1]);
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  GridFunction& operator+=(const GridFunction& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t k = 0; k < size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  GridFunction& operator*=(double c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  friend GridFunction operator*(double c, GridFunction f) { return f *= c; }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

// Normal derivatives on cell faces. Axis 0 holds (nx+1)*ny x-faces,
// axis 1 holds nx*(ny+1) y-faces. Boundary faces are zero (Neumann).
struct FaceField {
  Grid grid;
  std::array<std::vector<double>, 2> faces;

  std::size_t xface(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.nx() + 1) +
           static_cast<std::size_t>(i);
  }
  std::size_t yface(int i, int j) const { return grid.index(i, j); }
};

inline double integrate(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

inline double mean(const GridFunction& f) { return integrate(f) / f.grid().volume(); }

inline double l2_squared(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s * f.grid().cell_volume();
}

inline double inner(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid());
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.grid().cell_volume();
}

inline GridFunction project_mean_zero(GridFunction f) {
  const double m = mean(f);
  for (auto& v : f.values()) v -= m;
  return f;
}

inline FaceField gradient(const GridFunction& u) {
  const Grid& g = u.grid();
  const int nx = g.nx(), ny = g.ny();
  FaceField ff{g, {}};
  ff.faces[0].assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
  const double hx = g.spacing(0);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      ff.faces[0][ff.xface(i, j)] = (u[g.index(i, j)] - u[g.index(i - 1, j)]) / hx;
  if (g.dimension == 2) {
    ff.faces[1].assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
    const double hy = g.spacing(1);
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        ff.faces[1][ff.yface(i, j)] = (u[g.index(i, j)] - u[g.index(i, j - 1)]) / hy;
  }
  return ff;
}

// Squared cell gradient: mean of the squared normal derivatives on the two
// faces of each axis, summed over axes.
inline std::vector<double> cell_gradient_sq(const FaceField& ff) {
  const Grid& g = ff.grid;
  const int nx = g.nx(), ny = g.ny();
  std::vector<double> m(g.size(), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double a = ff.faces[0][ff.xface(i, j)], b = ff.faces[0][ff.xface(i + 1, j)];
      double s = 0.5 * (a * a + b * b);
      if (g.dimension == 2) {
        const double c = ff.faces[1][ff.yface(i, j)], d = ff.faces[1][ff.yface(i, j + 1)];
        s += 0.5 * (c * c + d * d);
      }
      m[g.index(i, j)] = s;
    }
  return m;
}

inline GridFunction gradient_magnitude(const GridFunction& u) {
  auto m = cell_gradient_sq(gradient(u));
  for (auto& v : m) v = std::sqrt(v);
  return GridFunction(u.grid(), std::move(m));
}

// Divergence of face fluxes F = kappa_f * g_f where kappa_f is the mean of the
// cell coefficients kappa_c = (m_c + delta^2)^((p_c-2)/2) of the two adjacent
// cells. This is minus the L2 gradient of
//   E(u) = sum_c V/p_c ((m_c + delta^2)^(p_c/2) - delta^(p_c)).
inline GridFunction px_flux_divergence_from(const GridFunction& u, const std::vector<double>& p,
                                            double delta, std::vector<double>* kappa_out = nullptr,
                                            std::vector<double>* msq_out = nullptr) {
  const Grid& g = u.grid();
  const int nx = g.nx(), ny = g.ny();
  const FaceField ff = gradient(u);
  std::vector<double> m = cell_gradient_sq(ff);
  std::vector<double> kappa(g.size());
  const double d2 = delta * delta;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double e = 0.5 * (p[k] - 2.0);
    kappa[k] = e == 0.0 ? 1.0 : std::pow(m[k] + d2, e);
  }
  GridFunction div(g);
  const double hx = g.spacing(0);
  for (int j = 0; j < ny; ++j) {
    double left = 0.0;
    for (int i = 0; i < nx; ++i) {
      double right = 0.0;
      if (i + 1 < nx) {
        const std::size_t a = g.index(i, j), b = g.index(i + 1, j);
        right = 0.5 * (kappa[a] + kappa[b]) * ff.faces[0][ff.xface(i + 1, j)];
      }
      div[g.index(i, j)] = (right - left) / hx;
      left = right;
    }
  }
  if (g.dimension == 2) {
    const double hy = g.spacing(1);
    for (int i = 0; i < nx; ++i) {
      double low = 0.0;
      for (int j = 0; j < ny; ++j) {
        double high = 0.0;
        if (j + 1 < ny) {
          const std::size_t a = g.index(i, j), b = g.index(i, j + 1);
          high = 0.5 * (kappa[a] + kappa[b]) * ff.faces[1][ff.yface(i, j + 1)];
        }
        div[g.index(i, j)] += (high - low) / hy;
        low = high;
      }
    }
  }
  if (kappa_out) *kappa_out = std::move(kappa);
  if (msq_out) *msq_out = std::move(m);
  return div;
}

}  // namespace pxlab
