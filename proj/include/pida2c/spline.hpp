#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace pida2c {

// Not-a-knot cubic interpolating spline. Reproduces polynomials up to degree
// three exactly, which pins down the easy integral cases; needs at least four
// knots (callers fall back to the trapezoid rule below that).
class CubicSpline {
 public:
  CubicSpline(std::span<const double> x, std::span<const double> y)
      : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    const std::size_t n = x_.size();
    if (n < 4) throw std::invalid_argument("CubicSpline needs >= 4 points");
    if (y_.size() != n)
      throw std::invalid_argument("CubicSpline: x/y size mismatch");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(x_[i] < x_[i + 1]))
        throw std::invalid_argument("CubicSpline: x must be increasing");
    }
    solve_moments();
  }

  double operator()(double t) const {
    const std::size_t i = interval(t);
    const double dx = t - x_[i];
    const double h = x_[i + 1] - x_[i];
    const double b = slope_coeff(i, h);
    const double c = m_[i] / 2.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return y_[i] + dx * (b + dx * (c + dx * d));
  }

  // Definite integral over [x.front(), x.back()].
  double integral() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
      const double h = x_[i + 1] - x_[i];
      const double b = slope_coeff(i, h);
      total += h * (y_[i] + h * (b / 2.0 + h * (m_[i] / 6.0 +
                                                (m_[i + 1] - m_[i]) / 24.0)));
    }
    return total;
  }

 private:
  double slope_coeff(std::size_t i, double h) const {
    return (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
  }

  std::size_t interval(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    auto i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    if (i == 0) return 0;
    if (i >= x_.size()) return x_.size() - 2;
    return i - 1;
  }

  // Second derivatives M_i. Interior continuity equations plus not-a-knot end
  // conditions (third derivative continuous across the first and last interior
  // knots); M_0 and M_{n-1} are eliminated so the system stays tridiagonal.
  void solve_moments() {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

    const std::size_t m = n - 2;  // unknowns M_1 .. M_{n-2}
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      lower[k] = h[i - 1];
      diag[k] = 2.0 * (h[i - 1] + h[i]);
      upper[k] = h[i];
      rhs[k] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    // M_0 = (1 + h0/h1) M_1 - (h0/h1) M_2
    const double r0 = h[0] / h[1];
    diag[0] += lower[0] * (1.0 + r0);
    upper[0] -= lower[0] * r0;
    // M_{n-1} = (1 + h_{n-2}/h_{n-3}) M_{n-2} - (h_{n-2}/h_{n-3}) M_{n-3}
    const double r1 = h[n - 2] / h[n - 3];
    diag[m - 1] += upper[m - 1] * (1.0 + r1);
    lower[m - 1] -= upper[m - 1] * r1;

    // Thomas solve.
    for (std::size_t k = 1; k < m; ++k) {
      const double w = lower[k] / diag[k - 1];
      diag[k] -= w * upper[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> sol(m);
    sol[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
      sol[k] = (rhs[k] - upper[k] * sol[k + 1]) / diag[k];
    }

    m_.assign(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) m_[k + 1] = sol[k];
    m_[0] = (1.0 + r0) * m_[1] - r0 * m_[2];
    m_[n - 1] = (1.0 + r1) * m_[n - 2] - r1 * m_[n - 3];
  }

  std::vector<double> x_, y_, m_;
};

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    total += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  }
  return total;
}

}  // namespace pida2c
