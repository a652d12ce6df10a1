#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "grid.hpp"

namespace pxlab {

// Gauss-Legendre rule on [-1,1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int n) {
    if (n < 1) throw error("Gauss-Legendre needs at least one node");
    for (double z : boost::math::legendre_p_zeros<double>(n)) {
      const double d = boost::math::legendre_p_prime(n, z);
      const double w = 2.0 / ((1.0 - z * z) * d * d);
      nodes_.push_back(z);
      weights_.push_back(w);
      if (z != 0.0) {
        nodes_.push_back(-z);
        weights_.push_back(w);
      }
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(c + h * nodes_[i]);
    return s * h;
  }

 private:
  std::vector<double> nodes_, weights_;
};

// Radial profile on the ball of radius 3 in R^3 with piecewise exponent
// p = 3/2 + r, 5/2, 9/2 - r and piecewise linear u.
struct RadialProfile {
  static double p(double r) { return r < 1.0 ? 1.5 + r : (r < 2.0 ? 2.5 : 4.5 - r); }
  static double u(double r) { return r < 1.0 ? 0.75 - r : (r < 2.0 ? -0.25 : (104.0 * r - 251.0) / 172.0); }
  static double du(double r) { return r < 1.0 ? -1.0 : (r < 2.0 ? 0.0 : 104.0 / 172.0); }
};

struct QuotientRow {
  double eps = 0.0;
  double numerator = 0.0, denominator = 0.0, quotient = 0.0, envelope = 0.0;
  double numerator_inner = 0.0;      // unit-ball part of the numerator
  double numerator_bound = 0.0;      // 40 pi eps^{3/2}(eps-1)/ln eps
  double inner_bound = 0.0;          // 4 pi eps^{3/2}(eps-1)/ln eps
  double shell_partial = 0.0;        // (4 pi/3)(8-1)(eps/4)^{5/2}, middle-shell denominator
  double richardson = 0.0;           // relative n vs 2n difference
  double projected_denominator = 0.0, projected_quotient = 0.0;
};

namespace detail {

// Integral of 4 pi r^2 f(r) over [0,3], split at r = 1, r = 2 and at the
// given extra breakpoints so every panel is smooth.
template <class F>
double radial_integral(const GaussLegendre& gl, F&& f, std::vector<double> cuts) {
  cuts.insert(cuts.end(), {0.0, 1.0, 2.0, 3.0});
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    s += gl.integrate([&](double r) { return 4.0 * std::numbers::pi * r * r * f(r); }, cuts[i], cuts[i + 1]);
  }
  return s;
}

// Zeros of the piecewise-linear u - c on [0,3].
inline std::vector<double> shifted_zeros(double c) {
  std::vector<double> z;
  const double a = 0.75 - c;  // 0.75 - r - c = 0
  if (a > 0.0 && a < 1.0) z.push_back(a);
  const double b = (172.0 * c + 251.0) / 104.0;
  if (b > 2.0 && b < 3.0) z.push_back(b);
  return z;
}

}  // namespace detail

inline double radial_mean(int n = 64) {
  const GaussLegendre gl(n);
  const double total = detail::radial_integral(gl, [](double r) { return RadialProfile::u(r); }, {});
  return total / (36.0 * std::numbers::pi);
}

inline QuotientRow quotient_row(double eps, int n = 64) {
  QuotientRow q;
  q.eps = eps;
  auto numerator = [&](int nodes, double* inner) {
    const GaussLegendre gl(nodes);
    if (inner)
      *inner = gl.integrate([&](double r) { return 4.0 * std::numbers::pi * r * r * std::pow(eps, 1.5 + r); },
                            0.0, 1.0);
    return detail::radial_integral(
        gl, [&](double r) { return std::pow(std::abs(eps * RadialProfile::du(r)), RadialProfile::p(r)); }, {});
  };
  auto denominator = [&](int nodes, double c) {
    const GaussLegendre gl(nodes);
    return detail::radial_integral(
        gl, [&](double r) { return std::pow(std::abs(eps * (RadialProfile::u(r) - c)), RadialProfile::p(r)); },
        detail::shifted_zeros(c));
  };
  q.numerator = numerator(n, &q.numerator_inner);
  q.denominator = denominator(n, 0.0);
  q.quotient = q.numerator / q.denominator;
  const double num2 = numerator(2 * n, nullptr), den2 = denominator(2 * n, 0.0);
  q.richardson = std::max(std::abs(num2 - q.numerator) / std::abs(num2),
                          std::abs(den2 - q.denominator) / std::abs(den2));
  const double c = radial_mean(n);
  q.projected_denominator = denominator(n, c);
  q.projected_quotient = q.numerator / q.projected_denominator;
  q.shell_partial = 4.0 * std::numbers::pi / 3.0 * 7.0 * std::pow(eps / 4.0, 2.5);
  if (eps > 1.0) {
    const double L = std::log(eps);
    q.envelope = 960.0 * (eps - 1.0) / (7.0 * eps * L);
    q.inner_bound = 4.0 * std::numbers::pi * std::pow(eps, 1.5) * (eps - 1.0) / L;
    q.numerator_bound = 10.0 * q.inner_bound;
  } else {
    q.envelope = q.inner_bound = q.numerator_bound = std::numeric_limits<double>::quiet_NaN();
  }
  return q;
}

struct QuotientCheck {
  bool numerator_ok = true, inner_ok = true, denominator_ok = true, printed_shell_ok = true;
  bool quotient_ok = true, richardson_ok = true;
  bool all() const {
    return numerator_ok && inner_ok && denominator_ok && printed_shell_ok && quotient_ok && richardson_ok;
  }
};

inline QuotientCheck check_quotient_row(const QuotientRow& q) {
  QuotientCheck c;
  c.richardson_ok = q.richardson <= 1e-8;
  c.denominator_ok = q.denominator >= q.shell_partial;
  c.printed_shell_ok = q.denominator >= 7.0 * std::numbers::pi / 24.0 * std::pow(q.eps, 2.5);
  if (q.eps > 1.0) {
    c.numerator_ok = q.numerator <= q.numerator_bound;
    c.inner_ok = q.numerator_inner <= q.inner_bound;
    c.quotient_ok = q.quotient <= q.envelope;
  }
  return c;
}

inline std::vector<QuotientRow> quotient_sweep(const std::vector<double>& eps, int n = 64) {
  std::vector<QuotientRow> out;
  for (double e : eps) out.push_back(quotient_row(e, n));
  return out;
}

inline void write_quotient_csv(std::ostream& os, const std::vector<QuotientRow>& rows) {
  os << "eps,numerator,denominator,quotient,envelope\n";
  char buf[256];
  for (const auto& q : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", q.eps, q.numerator, q.denominator,
                  q.quotient, q.envelope);
    os << buf;
  }
}

}  // namespace pxlab
