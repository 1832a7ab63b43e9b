#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "vbarms/csr.hpp"
#include "vbarms/errors.hpp"
#include "vbarms/krylov.hpp"

using namespace vbarms;

namespace {

LinearOperator matvec(const CsrMatrix& a) {
  return [&a](const double* x, double* y) { spmv(a, x, y); };
}

}  // namespace

TEST_SUITE_BEGIN("krylov");

TEST_CASE("zero right-hand side short-circuits") {
  const int n = 7;
  CsrMatrix a = testutil::tridiag(n);
  std::vector<double> b(n, 0.0), x(n, 3.0);
  KrylovParams p;
  SolveStats st = fgmres(n, matvec(a), [n](const double* r, double* z) {
    std::copy(r, r + n, z);
  }, b, x, p);
  CHECK(st.converged);
  CHECK(st.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("an exact preconditioner converges in one iteration") {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    const int n = 40;
    CsrMatrix a = testutil::random_diag_dominant(n, 5, seed);
    std::vector<double> dense = testutil::dense_from_csr(a);
    LinearOperator exact_inv = [&dense, n](const double* r, double* z) {
      std::vector<double> rhs(r, r + n);
      std::vector<double> sol = testutil::dense_solve(dense, n, rhs);
      std::copy(sol.begin(), sol.end(), z);
    };
    std::mt19937_64 rng(seed);
    std::vector<double> b(n), x(n, 0.0);
    for (auto& v : b) v = testutil::usym(rng);
    KrylovParams p;
    p.tol = 1e-10;
    SolveStats st = fgmres(n, matvec(a), exact_inv, b, x, p);
    CHECK(st.converged);
    CHECK(st.iterations == 1);
    CHECK(st.precond_applies == 1);
    CHECK(testutil::relative_residual(a, x, b) <= 1e-10);
  }
}

TEST_CASE("unpreconditioned solve reports the true final residual") {
  const int n = 64;
  CsrMatrix a = testutil::laplace2d(8, 8);
  std::vector<double> b(n, 1.0), x(n, 0.0);
  KrylovParams p;
  p.tol = 1e-8;
  p.restart_dim = 200;  // single cycle
  p.max_iters = 200;
  LinearOperator noop = [n](const double* r, double* z) {
    std::copy(r, r + n, z);
  };
  SolveStats st = fgmres(n, matvec(a), noop, b, x, p);
  CHECK(st.converged);
  CHECK(st.final_relres ==
        doctest::Approx(testutil::relative_residual(a, x, b)).epsilon(1e-10));
  // History: the initial residual plus one estimate per iteration.
  CHECK(static_cast<int>(st.residual_history.size()) == st.iterations + 1);
  CHECK(st.residual_history[0] == doctest::Approx(1.0));
  // Single cycle: the estimates never increase.
  for (std::size_t i = 1; i < st.residual_history.size(); ++i)
    CHECK(st.residual_history[i] <=
          st.residual_history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("restarts still converge and keep the history aligned") {
  const int n = 100;
  CsrMatrix a = testutil::laplace2d(10, 10);
  std::vector<double> b(n, 1.0), x(n, 0.0);
  KrylovParams p;
  p.tol = 1e-8;
  p.restart_dim = 7;
  p.max_iters = 500;
  LinearOperator noop = [n](const double* r, double* z) {
    std::copy(r, r + n, z);
  };
  SolveStats st = fgmres(n, matvec(a), noop, b, x, p);
  CHECK(st.converged);
  CHECK(st.iterations > 7);  // at least one restart happened
  CHECK(static_cast<int>(st.residual_history.size()) == st.iterations + 1);
  CHECK(testutil::relative_residual(a, x, b) <= 1e-8);
  // Estimates within the first full cycle never increase.
  for (int i = 1; i <= 7; ++i)
    CHECK(st.residual_history[i] <=
          st.residual_history[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("a non-finite operator raises a divergence error") {
  const int n = 5;
  std::vector<double> b(n, 1.0), x(n, 0.0);
  LinearOperator bad = [n](const double*, double* y) {
    for (int i = 0; i < n; ++i) y[i] = std::nan("");
  };
  LinearOperator noop = [n](const double* r, double* z) {
    std::copy(r, r + n, z);
  };
  KrylovParams p;
  CHECK_THROWS_AS(fgmres(n, bad, noop, b, x, p), DivergenceError);
}

TEST_CASE("a singular operator exhausts the basis without dying") {
  const int n = 4;
  LinearOperator zero = [n](const double*, double* y) {
    std::fill(y, y + n, 0.0);
  };
  LinearOperator noop = [n](const double* r, double* z) {
    std::copy(r, r + n, z);
  };
  std::vector<double> b(n, 1.0), x(n, 0.0);
  KrylovParams p;
  p.max_iters = 10;
  SolveStats st = fgmres(n, zero, noop, b, x, p);
  CHECK(!st.converged);
  for (double v : x) CHECK(std::isfinite(v));
  CHECK(st.final_relres == doctest::Approx(1.0));
}

TEST_CASE("happy breakdown solves exactly and stops") {
  // Identity operator: the first Krylov step already spans the solution.
  const int n = 6;
  LinearOperator ident = [n](const double* r, double* z) {
    std::copy(r, r + n, z);
  };
  std::vector<double> b{1, 2, 3, 4, 5, 6}, x(n, 0.0);
  KrylovParams p;
  p.tol = 1e-12;
  SolveStats st = fgmres(n, ident, ident, b, x, p);
  CHECK(st.converged);
  CHECK(st.iterations == 1);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(b[i]));
}

TEST_CASE("parameters are validated") {
  KrylovParams p;
  p.tol = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.tol = 1e-6;
  p.restart_dim = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.restart_dim = 10;
  p.max_iters = -1;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_SUITE_END();
