#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pida2c {

struct OlsFit {
  std::vector<double> coeffs;   // one per design column; dropped columns are 0
  std::vector<int> dropped;     // indices of collinear columns
  bool singular = false;        // any column dropped
};

// Ordinary least squares via the normal equations. Columns are rescaled to
// unit max-abs before solving (the gain columns span four orders of
// magnitude), and near-zero pivots mark collinear columns, which are dropped
// and reported rather than aborting the fit.
inline OlsFit ols_fit(const std::vector<std::vector<double>>& rows,
                      const std::vector<double>& y) {
  const std::size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("ols_fit: no rows");
  const std::size_t p = rows.front().size();
  if (y.size() != n) throw std::invalid_argument("ols_fit: y size mismatch");

  std::vector<double> scale(p, 0.0);
  for (const auto& row : rows) {
    if (row.size() != p) throw std::invalid_argument("ols_fit: ragged design");
    for (std::size_t j = 0; j < p; ++j)
      scale[j] = std::max(scale[j], std::abs(row[j]));
  }
  for (double& s : scale)
    if (s == 0.0) s = 1.0;

  // XtX and Xty on the scaled design.
  std::vector<std::vector<double>> a(p, std::vector<double>(p, 0.0));
  std::vector<double> b(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = rows[r][i] / scale[i];
      b[i] += xi * y[r];
      for (std::size_t j = i; j < p; ++j)
        a[i][j] += xi * rows[r][j] / scale[j];
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < i; ++j) a[i][j] = a[j][i];

  double max_diag = 0.0;
  for (std::size_t i = 0; i < p; ++i) max_diag = std::max(max_diag, a[i][i]);
  const double pivot_tol = std::max(max_diag, 1.0) * 1e-12;

  OlsFit fit;
  std::vector<bool> active(p, true);

  // Gaussian elimination with partial pivoting; a column whose pivot falls
  // under tolerance is collinear with earlier ones and gets excluded.
  std::vector<std::vector<double>> u = a;
  std::vector<double> v = b;
  std::vector<std::size_t> order;  // columns in elimination order
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot_row = col;
    double best = 0.0;
    for (std::size_t r = order.size(); r < p; ++r) {
      if (std::abs(u[r][col]) > best) {
        best = std::abs(u[r][col]);
        pivot_row = r;
      }
    }
    if (best < pivot_tol) {
      active[col] = false;
      fit.dropped.push_back(static_cast<int>(col));
      fit.singular = true;
      continue;
    }
    const std::size_t at = order.size();
    std::swap(u[at], u[pivot_row]);
    std::swap(v[at], v[pivot_row]);
    for (std::size_t r = at + 1; r < p; ++r) {
      const double f = u[r][col] / u[at][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < p; ++c) u[r][c] -= f * u[at][c];
      v[r] -= f * v[at];
    }
    order.push_back(col);
  }

  std::vector<double> coeffs(p, 0.0);
  for (std::size_t k = order.size(); k-- > 0;) {
    const std::size_t col = order[k];
    double s = v[k];
    for (std::size_t c = col + 1; c < p; ++c) {
      if (active[c]) s -= u[k][c] * coeffs[c];
    }
    coeffs[col] = s / u[k][col];
  }
  for (std::size_t j = 0; j < p; ++j)
    coeffs[j] = active[j] ? coeffs[j] / scale[j] : 0.0;
  fit.coeffs = std::move(coeffs);
  return fit;
}

}  // namespace pida2c
