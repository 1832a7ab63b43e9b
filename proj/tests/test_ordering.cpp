#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "vbarms/compression.hpp"
#include "vbarms/errors.hpp"
#include "vbarms/ordering.hpp"
#include "vbarms/quotient.hpp"
#include "vbarms/vbcsr.hpp"

using namespace vbarms;

namespace {

QuotientGraph singleton_quotient(const std::vector<std::vector<int>>& adj) {
  // Build a quotient graph over singleton supernodes from an explicit
  // adjacency (self loops added here).
  const int n = static_cast<int>(adj.size());
  std::vector<Triplet> t;
  for (int u = 0; u < n; ++u) {
    t.push_back({u, u, 1.0});
    for (int v : adj[u]) t.push_back({u, v, 1.0});
  }
  CsrMatrix a = csr_from_triplets(n, n, std::move(t));
  return build_quotient_graph(symmetrized_pattern(a),
                              singleton_partition(n));
}

void check_scaled_maxima(const CsrMatrix& a) {
  std::vector<double> row_max(a.n_rows, 0.0), col_max(a.n_cols, 0.0);
  for (int i = 0; i < a.n_rows; ++i)
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const double v = std::fabs(a.values[k]);
      row_max[i] = std::max(row_max[i], v);
      col_max[a.col_idx[k]] = std::max(col_max[a.col_idx[k]], v);
    }
  for (double m : row_max) CHECK(m <= 1.0 + 1e-14);
  for (double m : col_max) CHECK(m <= 1.0 + 1e-14);
}

}  // namespace

TEST_SUITE_BEGIN("ordering");

TEST_CASE("scaling caps row and column maxima at one") {
  for (CsrMatrix a : testutil::desk_corpus()) {
    const CsrMatrix original = a;
    ScalingPair sc = scale_in_place(a);
    check_scaled_maxima(a);
    // The factors reproduce the scaled values from the originals.
    for (int i = 0; i < a.n_rows; ++i)
      for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
        CHECK(a.values[k] == doctest::Approx(original.values[k] *
                                             sc.row_scale[i] *
                                             sc.col_scale[a.col_idx[k]])
                                 .epsilon(1e-14));
  }
}

TEST_CASE("scaling the block form matches scaling the flat form") {
  CsrMatrix a = testutil::block_tridiag(10, 3, 77);
  BlockPartition part = make_partition(30, [] {
    std::vector<int> b(30);
    for (int i = 0; i < 30; ++i) b[i] = i / 3;
    return b;
  }());
  VbcsrMatrix m = to_vbcsr(a, part);
  ScalingPair s1 = scale_in_place(a);
  ScalingPair s2 = scale_in_place(m);
  for (int i = 0; i < 30; ++i) {
    CHECK(s1.row_scale[i] == doctest::Approx(s2.row_scale[i]).epsilon(1e-15));
    CHECK(s1.col_scale[i] == doctest::Approx(s2.col_scale[i]).epsilon(1e-15));
  }
  CsrMatrix back = vbcsr_to_csr(m);
  std::vector<double> da = testutil::dense_from_csr(a);
  std::vector<double> db = testutil::dense_from_csr(back);
  for (std::size_t i = 0; i < da.size(); ++i)
    CHECK(da[i] == doctest::Approx(db[i]).epsilon(1e-15));
}

TEST_CASE("scaling refuses an empty row") {
  CsrMatrix a = csr_from_triplets(3, 3, {{0, 0, 1.0}, {2, 2, 1.0}});
  try {
    scale_in_place(a);
    FAIL("empty row accepted");
  } catch (const SingularScalingError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("independent set on a path picks the hand-derived set") {
  // Path 0-1-2-3-4: degree order 0,4 then the middle; picks 0, 4, 2.
  QuotientGraph q = singleton_quotient({{1}, {0, 2}, {1, 3}, {2, 4}, {3}});
  IndependentSetOrdering iso = block_independent_set(q);
  CHECK(iso.independent_blocks == 3);
  CHECK(iso.independent_rows == 3);
  CHECK(iso.supernode_perm.inverse[0] == 0);
  CHECK(iso.supernode_perm.inverse[1] == 4);
  CHECK(iso.supernode_perm.inverse[2] == 2);
}

TEST_CASE("independent set on a star keeps all leaves") {
  QuotientGraph q = singleton_quotient({{1, 2, 3, 4}, {0}, {0}, {0}, {0}});
  IndependentSetOrdering iso = block_independent_set(q);
  CHECK(iso.independent_blocks == 4);
  CHECK(iso.supernode_perm.inverse[4] == 0);  // the hub lands last
}

TEST_CASE("independent set on an edgeless graph takes everything") {
  QuotientGraph q = singleton_quotient({{}, {}, {}});
  IndependentSetOrdering iso = block_independent_set(q);
  CHECK(iso.independent_blocks == 3);
}

TEST_CASE("excluded supernodes never join the set") {
  QuotientGraph q = singleton_quotient({{1}, {0, 2}, {1}});
  std::vector<char> excl{1, 0, 0};
  IndependentSetOrdering iso = block_independent_set(q, excl);
  CHECK(iso.independent_blocks == 1);
  CHECK(iso.supernode_perm.inverse[0] == 2);

  std::vector<char> none(3, 0);
  IndependentSetOrdering plain = block_independent_set(q, none);
  CHECK(plain.independent_blocks == block_independent_set(q).independent_blocks);
}

TEST_CASE("set members are pairwise non-adjacent on varied graphs") {
  for (const CsrMatrix& a : testutil::desk_corpus()) {
    const AdjacencyGraph g = symmetrized_pattern(a);
    BlockPartition part = exact_blocking(g);
    QuotientGraph q = build_quotient_graph(g, part);
    IndependentSetOrdering iso = block_independent_set(q);
    CHECK(iso.independent_blocks > 0);
    std::vector<char> in_set(q.n_supernodes(), 0);
    for (int s = 0; s < q.n_supernodes(); ++s)
      if (iso.supernode_perm.forward[s] < iso.independent_blocks) in_set[s] = 1;
    int rows = 0;
    for (int s = 0; s < q.n_supernodes(); ++s) {
      if (!in_set[s]) continue;
      rows += static_cast<int>(q.supernodes[s].size());
      for (int v : q.adjacency[s])
        if (v != s) CHECK(!in_set[v]);
    }
    CHECK(rows == iso.independent_rows);
  }
}

TEST_SUITE_END();
