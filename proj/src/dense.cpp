#include "vbarms/dense.hpp"

#include <cmath>
#include <cstring>
#include <utility>

namespace vbarms::dense {

void gemm_sub(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] -= aip * bp[j];
    }
  }
}

void gemm_set(const double* a, const double* b, double* c, int m, int k, int n) {
  std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemv_add(const double* a, const double* x, double* y, int m, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += ai[j] * x[j];
    y[i] += s;
  }
}

void gemv_sub(const double* a, const double* x, double* y, int m, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += ai[j] * x[j];
    y[i] -= s;
  }
}

void gemv_set(const double* a, const double* x, double* y, int m, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += ai[j] * x[j];
    y[i] = s;
  }
}

double frobenius_norm(const double* a, int m, int n) {
  double s = 0.0;
  std::size_t len = static_cast<std::size_t>(m) * n;
  for (std::size_t i = 0; i < len; ++i) s += a[i] * a[i];
  return std::sqrt(s);
}

double max_abs(const double* a, int m, int n) {
  double s = 0.0;
  std::size_t len = static_cast<std::size_t>(m) * n;
  for (std::size_t i = 0; i < len; ++i) s = std::max(s, std::fabs(a[i]));
  return s;
}

void PivotLU::solve(double* x) const {
  solve_panel(x, 1);
}

void PivotLU::solve_panel(double* x, int ncols) const {
  const int n = n_;
  // Row swaps recorded during elimination.
  for (int k = 0; k < n; ++k) {
    int p = pivots_[k];
    if (p != k) {
      for (int j = 0; j < ncols; ++j)
        std::swap(x[static_cast<std::size_t>(k) * ncols + j],
                  x[static_cast<std::size_t>(p) * ncols + j]);
    }
  }
  // Forward solve with unit lower triangle.
  for (int i = 1; i < n; ++i) {
    const double* li = lu_.data() + static_cast<std::size_t>(i) * n;
    double* xi = x + static_cast<std::size_t>(i) * ncols;
    for (int k = 0; k < i; ++k) {
      double lik = li[k];
      if (lik == 0.0) continue;
      const double* xk = x + static_cast<std::size_t>(k) * ncols;
      for (int j = 0; j < ncols; ++j) xi[j] -= lik * xk[j];
    }
  }
  // Back solve with U.
  for (int i = n - 1; i >= 0; --i) {
    const double* ui = lu_.data() + static_cast<std::size_t>(i) * n;
    double* xi = x + static_cast<std::size_t>(i) * ncols;
    for (int k = i + 1; k < n; ++k) {
      double uik = ui[k];
      if (uik == 0.0) continue;
      const double* xk = x + static_cast<std::size_t>(k) * ncols;
      for (int j = 0; j < ncols; ++j) xi[j] -= uik * xk[j];
    }
    double d = 1.0 / ui[i];
    for (int j = 0; j < ncols; ++j) xi[j] *= d;
  }
}

std::vector<double> PivotLU::inverse() const {
  const int n = n_;
  std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1.0;
  if (n > 0) solve_panel(inv.data(), n);
  return inv;
}

PivotLU invert_pivot(const double* block, int n) {
  PivotLU f;
  f.n_ = n;
  f.lu_.assign(block, block + static_cast<std::size_t>(n) * n);
  f.pivots_.assign(n, 0);
  double scale = max_abs(block, n, n);
  if (n > 0 && scale == 0.0) throw SingularPivotError(0.0);
  const double threshold = 1e-13 * scale;
  double* lu = f.lu_.data();
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::fabs(lu[static_cast<std::size_t>(k) * n + k]);
    for (int i = k + 1; i < n; ++i) {
      double v = std::fabs(lu[static_cast<std::size_t>(i) * n + k]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < threshold) throw SingularPivotError(best);
    f.pivots_[k] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j)
        std::swap(lu[static_cast<std::size_t>(k) * n + j],
                  lu[static_cast<std::size_t>(p) * n + j]);
    }
    double d = 1.0 / lu[static_cast<std::size_t>(k) * n + k];
    for (int i = k + 1; i < n; ++i) {
      double lik = lu[static_cast<std::size_t>(i) * n + k] * d;
      lu[static_cast<std::size_t>(i) * n + k] = lik;
      if (lik == 0.0) continue;
      for (int j = k + 1; j < n; ++j)
        lu[static_cast<std::size_t>(i) * n + j] -=
            lik * lu[static_cast<std::size_t>(k) * n + j];
    }
  }
  return f;
}

}  // namespace vbarms::dense
