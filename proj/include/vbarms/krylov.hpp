#pragma once

#include <functional>
#include <span>
#include <vector>

#include "vbarms/errors.hpp"

namespace vbarms {

// y := Op(x); both arrays have the system dimension.
using LinearOperator = std::function<void(const double* x, double* y)>;

struct KrylovParams {
  double tol = 1e-6;     // on the true relative residual |b - Ax| / |b|
  int max_iters = 1000;  // total inner iterations across restarts
  int restart_dim = 60;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double final_relres = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // initial value, then one per iteration
  int precond_applies = 0;
};

// Right-preconditioned flexible GMRES with restarts. Arnoldi uses modified
// Gram-Schmidt; the preconditioned vectors are stored so apply_m may change
// between iterations. Inside a cycle convergence is judged by the recurrence
// estimate; at cycle boundaries the true residual is recomputed and decides.
// x holds the initial guess on entry and the solution on return.
// A zero right-hand side short-circuits to x = 0, converged, 0 iterations.
// Throws DivergenceError when the iteration produces a non-finite value.
SolveStats fgmres(int n, const LinearOperator& apply_a,
                  const LinearOperator& apply_m, std::span<const double> b,
                  std::span<double> x, const KrylovParams& params);

}  // namespace vbarms
