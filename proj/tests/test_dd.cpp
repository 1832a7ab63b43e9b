#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "vbarms/compression.hpp"
#include "vbarms/dd.hpp"
#include "vbarms/errors.hpp"
#include "vbarms/krylov.hpp"
#include "vbarms/quotient.hpp"
#include "vbarms/vbarms.hpp"

using namespace vbarms;

namespace {

QuotientGraph quotient_of(const CsrMatrix& a, const BlockPartition& part) {
  return build_quotient_graph(symmetrized_pattern(a), part);
}

QuotientGraph exact_quotient(const CsrMatrix& a, BlockPartition& part_out) {
  part_out = exact_blocking(symmetrized_pattern(a));
  return quotient_of(a, part_out);
}

std::vector<double> random_vec(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (auto& t : v) t = testutil::usym(rng);
  return v;
}

FactorParams tight_factor() {
  FactorParams p;
  p.drop_tol = 0.0;
  p.exact_last_level = true;
  p.max_levels = 3;
  p.min_schur_size = 4;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("dd");

TEST_CASE("the partitioner splits a path down the middle") {
  CsrMatrix a = testutil::tridiag(4);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 2);
  CHECK(map.owner == std::vector<int>{0, 0, 1, 1});
  CHECK(map.domain_rows[0] == std::vector<int>{0, 1});
  CHECK(map.domain_rows[1] == std::vector<int>{2, 3});
}

TEST_CASE("grid domains stay balanced and deterministic") {
  CsrMatrix a = testutil::laplace2d(8, 8);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 4);
  REQUIRE(map.n_domains == 4);
  for (int d = 0; d < 4; ++d) {
    const int rows = static_cast<int>(map.domain_rows[d].size());
    CHECK(rows >= 14);
    CHECK(rows <= 18);
  }
  DomainMap again = partition_quotient_graph(q, 4);
  CHECK(again.owner == map.owner);

  CHECK_THROWS_AS(partition_quotient_graph(q, 0), Error);
  CHECK_THROWS_AS(partition_quotient_graph(q, q.n_supernodes() + 1), Error);
  DomainMap whole = partition_quotient_graph(q, 1);
  for (int o : whole.owner) CHECK(o == 0);
}

TEST_CASE("a disconnected graph still gets everything claimed") {
  // Two 3-vertex paths with no coupling between them.
  std::vector<Triplet> t;
  for (int base : {0, 3}) {
    for (int i = 0; i < 3; ++i) t.push_back({base + i, base + i, 2.0});
    for (int i = 0; i < 2; ++i) {
      t.push_back({base + i, base + i + 1, -1.0});
      t.push_back({base + i + 1, base + i, -1.0});
    }
  }
  CsrMatrix a = csr_from_triplets(6, 6, std::move(t));
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 2);
  std::vector<int> count(2, 0);
  for (int o : map.owner) ++count[o];
  CHECK(count[0] == 3);
  CHECK(count[1] == 3);
}

TEST_CASE("domain files are parsed and validated") {
  CsrMatrix a = testutil::tridiag(4);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  std::istringstream good("1\n1\n0\n0\n");
  DomainMap map = read_domain_map(good, q);
  CHECK(map.n_domains == 2);
  CHECK(map.owner == std::vector<int>{1, 1, 0, 0});

  std::istringstream short_file("0\n1\n");
  CHECK_THROWS_AS(read_domain_map(short_file, q), ParseError);
  CHECK_THROWS_AS(domain_map_from_owner({0, 0, 2, 2}, q), Error);
  CHECK_THROWS_AS(domain_map_from_owner({0, 0, -1, 1}, q), DimensionError);
}

TEST_CASE("interface classification on a split path") {
  CsrMatrix a = testutil::tridiag(8);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 2);
  std::vector<LocalSystem> locals = build_local_systems(a, part, map, 0);
  REQUIRE(locals.size() == 2);

  // Domain 0 owns rows 0..3; only row 3 touches the other side.
  CHECK(locals[0].interior_rows == std::vector<int>{0, 1, 2});
  CHECK(locals[0].interface_rows == std::vector<int>{3});
  CHECK(locals[0].rows == std::vector<int>{0, 1, 2, 3});
  CHECK(locals[0].n_interior_rows == 3);
  CHECK(locals[0].n_owned_rows == 4);

  // Domain 1 owns rows 4..7; interfaces come after the interiors locally.
  CHECK(locals[1].interior_rows == std::vector<int>{5, 6, 7});
  CHECK(locals[1].interface_rows == std::vector<int>{4});
  CHECK(locals[1].rows == std::vector<int>{5, 6, 7, 4});

  // One coupling each way, carrying the cross entry.
  REQUIRE(locals[0].couplings.size() == 1);
  CHECK(locals[0].couplings[0].neighbor == 1);
  CHECK(locals[0].couplings[0].matrix.nnz() == 1);
  CHECK(locals[0].couplings[0].matrix.values[0] == -1.0);
  REQUIRE(locals[1].couplings.size() == 1);
  CHECK(locals[1].couplings[0].neighbor == 0);

  // Panel split of the owned part.
  CHECK(locals[0].b_panel().rows.total() == 3);
  CHECK(locals[0].c_panel().rows.total() == 1);
  CHECK(locals[0].e_panel().rows.total() == 1);
  CHECK(locals[0].f_panel().cols.total() == 1);
}

TEST_CASE("overlap rings extend the local system without changing ownership") {
  CsrMatrix a = testutil::tridiag(8);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 2);
  std::vector<LocalSystem> locals = build_local_systems(a, part, map, 1);
  CHECK(locals[0].rows == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(locals[0].n_owned_rows == 4);
  CHECK(locals[1].rows == std::vector<int>{5, 6, 7, 4, 3});
  CHECK(locals[1].n_owned_rows == 4);
  // The overlap copy keeps the row's in-set couplings only.
  const VbcsrMatrix& m0 = locals[0].matrix;
  CHECK(m0.rows.total() == 5);
  std::vector<double> d0 = to_dense(m0);
  CHECK(d0[4 * 5 + 4] == 2.0);   // a(4,4)
  CHECK(d0[4 * 5 + 3] == -1.0);  // a(4,3)
  // a(4,5) falls outside the expanded set and is dropped.
}

TEST_CASE("block-Jacobi applies independent exact local solves") {
  CsrMatrix a = testutil::block_tridiag(8, 2, 19);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 2);
  std::vector<LocalSystem> locals = build_local_systems(a, part, map, 0);

  DdParams dp;
  dp.factor = tight_factor();
  dp.threads = 1;
  GlobalPreconditioner gp =
      build_global_preconditioner(DdKind::bj, std::move(locals), dp);
  CHECK(gp.n == 16);

  std::vector<double> r = random_vec(16, 5);
  std::vector<double> z = bj_apply(gp, r);

  // Reference: solve each domain's local matrix exactly, scatter owned rows.
  std::vector<LocalSystem> ref_locals = build_local_systems(a, part, map, 0);
  for (const LocalSystem& ls : ref_locals) {
    const int nl = static_cast<int>(ls.rows.size());
    CsrMatrix lm = vbcsr_to_csr(ls.matrix);
    std::vector<double> rl(nl);
    for (int k = 0; k < nl; ++k) rl[k] = r[ls.rows[k]];
    std::vector<double> zl =
        testutil::dense_solve(testutil::dense_from_csr(lm), nl, rl);
    for (int k = 0; k < ls.n_owned_rows; ++k)
      CHECK(z[ls.rows[k]] == doctest::Approx(zl[k]).epsilon(1e-9));
  }

  CHECK_THROWS_AS(ras_apply(gp, r), Error);  // wrong kind
}

TEST_CASE("restricted Schwarz with zero overlap is block-Jacobi") {
  for (std::uint64_t seed : {3, 4}) {
    CsrMatrix a = testutil::random_diag_dominant(60, 5, seed);
    BlockPartition part;
    QuotientGraph q = exact_quotient(a, part);
    DomainMap map = partition_quotient_graph(q, 3);
    DdParams dp;
    dp.factor = tight_factor();
    GlobalPreconditioner bj = build_global_preconditioner(
        DdKind::bj, build_local_systems(a, part, map, 0), dp);
    GlobalPreconditioner ras = build_global_preconditioner(
        DdKind::ras, build_local_systems(a, part, map, 0), dp);
    std::vector<double> r = random_vec(60, seed + 100);
    std::vector<double> zb = bj_apply(bj, r);
    std::vector<double> zr = ras_apply(ras, r);
    for (int i = 0; i < 60; ++i) CHECK(std::fabs(zb[i] - zr[i]) <= 1e-14);
  }
}

TEST_CASE("overlap changes the result but owned rows stay the only outputs") {
  CsrMatrix a = testutil::laplace2d(10, 10);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 4);
  DdParams dp;
  dp.factor = tight_factor();
  dp.overlap = 1;
  GlobalPreconditioner ras = build_global_preconditioner(
      DdKind::ras, build_local_systems(a, part, map, 1), dp);
  std::vector<double> r = random_vec(100, 8);
  std::vector<double> z = ras_apply(ras, r);
  for (double v : z) CHECK(std::isfinite(v));

  // Overlapped locals are rejected by the block-Jacobi builder.
  CHECK_THROWS_AS(build_global_preconditioner(
                      DdKind::bj, build_local_systems(a, part, map, 1), dp),
                  Error);
  // And by the Schur builder.
  CHECK_THROWS_AS(build_schur_preconditioner(
                      build_local_systems(a, part, map, 1), dp),
                  Error);
}

TEST_CASE("every preconditioner with one domain matches the sequential solve") {
  CsrMatrix a = testutil::block_tridiag(10, 3, 23);
  const int n = 30;
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 1);

  DdParams dp;
  dp.factor = tight_factor();
  VbarmsPreconditioner seq = vbarms_from_partition(a, part, dp.factor);

  std::vector<double> r = random_vec(n, 33);
  std::vector<double> zs(n);
  seq.apply(r.data(), zs.data());

  for (DdKind kind : {DdKind::bj, DdKind::ras, DdKind::schur}) {
    GlobalPreconditioner gp = build_global_preconditioner(
        kind, build_local_systems(a, part, map, 0), dp);
    std::vector<double> z(n);
    gp.apply(r.data(), z.data());
    for (int i = 0; i < n; ++i) CHECK(std::fabs(z[i] - zs[i]) <= 1e-14);
  }
}

TEST_CASE("schur local factorizations end exactly on the interface") {
  CsrMatrix a = testutil::laplace2d(9, 9);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 3);
  std::vector<LocalSystem> locals = build_local_systems(a, part, map, 0);
  DdParams dp;
  dp.factor = tight_factor();
  GlobalPreconditioner gp =
      build_schur_preconditioner(std::move(locals), dp);
  for (const auto& dom : gp.domains) {
    if (dom.sys.interface_rows.empty()) continue;
    CHECK(dom.in_global);
    CHECK(dom.factor.last_n ==
          static_cast<int>(dom.sys.interface_rows.size()));
    CHECK(dom.factor.tracked);
  }
  CHECK(gp.interface_offset.back() ==
        static_cast<int>(gp.interface_rows().size()));
}

TEST_CASE("the assembled interface operator matches the dense Schur matrix") {
  for (std::uint64_t seed : {12, 13}) {
    CsrMatrix a = testutil::random_diag_dominant(48, 4, seed);
    const int n = 48;
    BlockPartition part;
    QuotientGraph q = exact_quotient(a, part);
    DomainMap map = partition_quotient_graph(q, 3);
    std::vector<LocalSystem> locals = build_local_systems(a, part, map, 0);
    DdParams dp;
    dp.factor = tight_factor();
    GlobalPreconditioner gp = build_schur_preconditioner(std::move(locals), dp);

    const std::vector<int> ifrows = gp.interface_rows();
    const int t = static_cast<int>(ifrows.size());
    REQUIRE(t > 0);

    // Dense global Schur on the interface set: order rows [interiors, interfaces].
    std::vector<int> interior;
    std::vector<char> is_if(n, 0);
    for (int rIdx : ifrows) is_if[rIdx] = 1;
    for (int i = 0; i < n; ++i)
      if (!is_if[i]) interior.push_back(i);
    const int ni = static_cast<int>(interior.size());
    std::vector<int> order(interior);
    order.insert(order.end(), ifrows.begin(), ifrows.end());
    std::vector<double> da = testutil::dense_from_csr(a);
    std::vector<double> reordered(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        reordered[i * n + j] = da[order[i] * n + order[j]];
    // S = C - E B^{-1} F over the leading ni rows.
    std::vector<double> bb(static_cast<std::size_t>(ni) * ni);
    for (int i = 0; i < ni; ++i)
      for (int j = 0; j < ni; ++j) bb[i * ni + j] = reordered[i * n + j];
    std::vector<double> s(static_cast<std::size_t>(t) * t);
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        s[i * t + j] = reordered[(ni + i) * n + (ni + j)];
    for (int col = 0; col < t; ++col) {
      std::vector<double> rhs(ni);
      for (int i = 0; i < ni; ++i) rhs[i] = reordered[i * n + (ni + col)];
      std::vector<double> sol = testutil::dense_solve(bb, ni, rhs);
      for (int i = 0; i < t; ++i) {
        double acc = 0.0;
        for (int k = 0; k < ni; ++k) acc += reordered[(ni + i) * n + k] * sol[k];
        s[i * t + col] -= acc;
      }
    }

    // Compare column by column through the scaled-coordinate operator.
    for (int col = 0; col < t; ++col) {
      std::vector<double> y(t, 0.0), sy(t);
      y[col] = 1.0;
      gp.apply_global_schur(y.data(), sy.data());
      for (int i = 0; i < t; ++i)
        CHECK(sy[i] == doctest::Approx(s[i * t + col]).epsilon(1e-9));
    }
  }
}

TEST_CASE("schur preconditioned FGMRES solves the global system") {
  CsrMatrix a = testutil::laplace2d(12, 12);
  const int n = 144;
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 4);
  DdParams dp;
  dp.factor.drop_tol = 1e-4;
  dp.inner_iters = 5;
  dp.inner_tol = 1e-2;
  GlobalPreconditioner gp = build_global_preconditioner(
      DdKind::schur, build_local_systems(a, part, map, 0), dp);

  std::vector<double> b(n, 1.0), x(n, 0.0);
  KrylovParams kp;
  kp.tol = 1e-8;
  kp.max_iters = 300;
  LinearOperator am = [&a](const double* p, double* y) { spmv(a, p, y); };
  LinearOperator pm = [&gp](const double* r, double* z) { gp.apply(r, z); };
  SolveStats st = fgmres(n, am, pm, b, x, kp);
  CHECK(st.converged);
  CHECK(testutil::relative_residual(a, x, b) <= 1e-8);
}

TEST_CASE("concurrent applies are bit-identical across repeats and threads") {
  CsrMatrix a = testutil::laplace2d(10, 10);
  BlockPartition part;
  QuotientGraph q = exact_quotient(a, part);
  DomainMap map = partition_quotient_graph(q, 4);
  std::vector<double> r = random_vec(100, 77);

  for (DdKind kind : {DdKind::bj, DdKind::schur}) {
    DdParams dp1;
    dp1.factor = tight_factor();
    dp1.threads = 1;
    DdParams dp4 = dp1;
    dp4.threads = 4;
    GlobalPreconditioner g1 = build_global_preconditioner(
        kind, build_local_systems(a, part, map, 0), dp1);
    GlobalPreconditioner g4 = build_global_preconditioner(
        kind, build_local_systems(a, part, map, 0), dp4);
    std::vector<double> z1(100), z4(100), z4b(100);
    g1.apply(r.data(), z1.data());
    g4.apply(r.data(), z4.data());
    g4.apply(r.data(), z4b.data());
    for (int i = 0; i < 100; ++i) {
      CHECK(z1[i] == z4[i]);
      CHECK(z4[i] == z4b[i]);
    }
    CHECK(g1.precond_cells() == g4.precond_cells());
  }
}

TEST_SUITE_END();
