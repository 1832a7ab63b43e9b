#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "vbarms/compression.hpp"
#include "vbarms/csr.hpp"
#include "vbarms/errors.hpp"
#include "vbarms/quotient.hpp"

using namespace vbarms;

namespace {

// Six rows with hand-checked symmetrized patterns:
//   r0: {0,1,2}  r1: {0,1,3}  r2: {0,2,4,5}
//   r3: {1,3,4,5}  r4: {2,3,4}  r5: {2,3,5}
// cos^2(r0,r1) = 4/9, cos^2(r4,r5) = 4/9, every other pair is below 0.36.
CsrMatrix angle_fixture() {
  const std::vector<std::vector<int>> pat{{0, 1, 2},    {0, 1, 3},
                                          {0, 2, 4, 5}, {1, 3, 4, 5},
                                          {2, 3, 4},    {2, 3, 5}};
  std::vector<Triplet> t;
  for (int i = 0; i < 6; ++i)
    for (int j : pat[i]) t.push_back({i, j, i == j ? 4.0 : 1.0});
  return csr_from_triplets(6, 6, std::move(t));
}

}  // namespace

TEST_SUITE_BEGIN("compression");

TEST_CASE("identical symmetrized patterns collapse into one block") {
  // Rows 0 and 1 both see {0, 1}; row 2 is decoupled.
  CsrMatrix a = csr_from_triplets(3, 3,
                                  {{0, 0, 1.0},
                                   {0, 1, 2.0},
                                   {1, 0, 4.0},
                                   {1, 1, 5.0},
                                   {2, 2, 9.0}});
  BlockPartition part = exact_blocking(symmetrized_pattern(a));
  CHECK(part.n_blocks() == 2);
  CHECK(part.block_of[0] == part.block_of[1]);
  CHECK(part.block_of[2] != part.block_of[0]);

  // A fully dense pattern is a single indistinguishable group.
  CsrMatrix full = testutil::from_dense({1, 2, 3, 4, 5, 6, 7, 8, 9}, 3, 3);
  CHECK(exact_blocking(symmetrized_pattern(full)).n_blocks() == 1);
}

TEST_CASE("planted dense blocks are recovered exactly") {
  for (std::uint64_t seed : {1, 2, 3}) {
    testutil::Planted pl = testutil::planted_blocks(12, 2, 6, seed);
    BlockPartition part = exact_blocking(symmetrized_pattern(pl.matrix));
    CHECK(part.block_of == pl.block_of);
    BlockMetrics bm = block_metrics(pl.matrix, part);
    CHECK(bm.average_block_density == doctest::Approx(1.0));
  }
}

TEST_CASE("angle merging at the hand-checked thresholds") {
  CsrMatrix a = angle_fixture();

  BlockPartition loose = angle_blocking(a, 0.6);
  CHECK(loose.n_blocks() == 4);
  CHECK(loose.block_of[0] == loose.block_of[1]);
  CHECK(loose.block_of[4] == loose.block_of[5]);
  CHECK(loose.block_of[2] != loose.block_of[3]);
  CHECK(loose.block_of[0] != loose.block_of[4]);

  BlockPartition tight = angle_blocking(a, 0.7);
  CHECK(tight.n_blocks() == 6);
}

TEST_CASE("angle with tau = 1 reduces to exact blocking") {
  for (const CsrMatrix& a : testutil::desk_corpus()) {
    BlockPartition exact = exact_blocking(symmetrized_pattern(a));
    BlockPartition angle = angle_blocking(a, 1.0);
    CHECK(angle.block_of == exact.block_of);
  }
}

TEST_CASE("angle groups are unions of exact groups") {
  for (const CsrMatrix& a : testutil::desk_corpus()) {
    BlockPartition exact = exact_blocking(symmetrized_pattern(a));
    for (double tau : {0.9, 0.7, 0.5}) {
      BlockPartition angle = angle_blocking(a, tau);
      CHECK(angle.n_blocks() <= exact.n_blocks());
      // Rows indistinguishable by pattern can never be split apart.
      for (int i = 0; i < a.n_rows; ++i)
        for (int j = i + 1; j < a.n_rows; ++j)
          if (exact.block_of[i] == exact.block_of[j])
            CHECK(angle.block_of[i] == angle.block_of[j]);
    }
  }
}

TEST_CASE("graph merging maintains its density bookkeeping exactly") {
  for (const CsrMatrix& a : testutil::desk_corpus()) {
    const AdjacencyGraph g = symmetrized_pattern(a);
    for (double mu : {0.6, 0.7, 0.8, 0.9}) {
      GraphBlockingResult res = graph_blocking_detailed(a, mu);
      const double recomputed = pattern_av_bd(g, res.partition);
      CHECK(std::fabs(res.final_av_bd - recomputed) <= 1e-12);
      CHECK(res.final_av_bd >= mu - 1e-12);
      CHECK(res.final_av_bd ==
            doctest::Approx(static_cast<double>(res.pattern_nnz) /
                            static_cast<double>(res.covered_cells)));
    }
  }
}

TEST_CASE("graph merging with mu = 1 cannot merge anything") {
  for (const CsrMatrix& a : testutil::desk_corpus()) {
    BlockPartition exact = exact_blocking(symmetrized_pattern(a));
    BlockPartition graph = graph_blocking(a, 1.0);
    CHECK(graph.block_of == exact.block_of);
  }
}

TEST_CASE("graph merging actually coarsens when allowed") {
  CsrMatrix a = testutil::laplace2d(16, 16);
  BlockPartition exact = exact_blocking(symmetrized_pattern(a));
  BlockPartition graph = graph_blocking(a, 0.5);
  CHECK(graph.n_blocks() < exact.n_blocks());
  // Runs are deterministic.
  CHECK(graph_blocking(a, 0.5).block_of == graph.block_of);
}

TEST_CASE("method names round-trip and parameters are validated") {
  CHECK(compression_method_from_string("graph") == CompressionMethod::graph);
  CHECK(to_string(CompressionMethod::angle) == "angle");
  CHECK_THROWS_AS(compression_method_from_string("nope"), Error);

  CompressionParams p;
  p.method = CompressionMethod::angle;
  p.tau = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.tau = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p.tau = 0.8;
  CHECK_NOTHROW(p.validate());
  p.method = CompressionMethod::graph;
  p.mu = -0.1;
  CHECK_THROWS_AS(p.validate(), Error);

  CsrMatrix a = testutil::tridiag(10);
  CompressionParams c;
  c.method = CompressionMethod::checksum;
  BlockPartition via_dispatch = compress(a, c);
  CHECK(via_dispatch.block_of == exact_blocking(symmetrized_pattern(a)).block_of);
}

TEST_SUITE_END();
