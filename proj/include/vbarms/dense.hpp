#pragma once

// Small dense kernels for variable-size blocks. All matrices are row-major,
// stored contiguously, no leading-dimension padding.

#include <vector>

#include "vbarms/errors.hpp"

namespace vbarms::dense {

// C (m x n) := C - A (m x k) * B (k x n)
void gemm_sub(const double* a, const double* b, double* c, int m, int k, int n);

// C (m x n) := A (m x k) * B (k x n)
void gemm_set(const double* a, const double* b, double* c, int m, int k, int n);

// y (m) := y + A (m x n) * x (n)
void gemv_add(const double* a, const double* x, double* y, int m, int n);

// y (m) := y - A (m x n) * x (n)
void gemv_sub(const double* a, const double* x, double* y, int m, int n);

// y (m) := A (m x n) * x (n)
void gemv_set(const double* a, const double* x, double* y, int m, int n);

double frobenius_norm(const double* a, int m, int n);

double max_abs(const double* a, int m, int n);

// LU factorization with partial pivoting of an n x n block.
// Invariant: |u_kk| >= 1e-13 * max|original| for every pivot, enforced at
// construction.
class PivotLU {
 public:
  PivotLU() = default;

  int order() const { return n_; }

  // x := B^{-1} x
  void solve(double* x) const;

  // X (n x ncols, row-major) := B^{-1} X
  void solve_panel(double* x, int ncols) const;

  // Explicit B^{-1}, row-major.
  std::vector<double> inverse() const;

 private:
  friend PivotLU invert_pivot(const double* block, int n);
  int n_ = 0;
  std::vector<double> lu_;    // packed L (unit diag) and U
  std::vector<int> pivots_;   // row swapped with k at step k
};

// Factorizes a pivot block with GEPP. Throws SingularPivotError (level and
// block row unset) when a pivot falls below 1e-13 times the block's largest
// entry.
PivotLU invert_pivot(const double* block, int n);

}  // namespace vbarms::dense
