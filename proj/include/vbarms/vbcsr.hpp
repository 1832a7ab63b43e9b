#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vbarms/csr.hpp"
#include "vbarms/partition.hpp"

namespace vbarms {

// Sizes and row offsets of a contiguous block decomposition of 0..total-1.
struct BlockLayout {
  std::vector<int> sizes;
  std::vector<int> offsets;  // size n_blocks + 1

  int n_blocks() const { return static_cast<int>(sizes.size()); }
  int total() const { return offsets.empty() ? 0 : offsets.back(); }

  static BlockLayout from_sizes(std::vector<int> sizes);
};

// Variable-block CSR: a block-sparse matrix whose stored blocks are dense
// row-major panels in one shared arena. Block columns are sorted within each
// block row.
struct VbcsrMatrix {
  BlockLayout rows;
  BlockLayout cols;
  std::vector<std::int64_t> block_row_ptr;  // size rows.n_blocks() + 1
  std::vector<int> block_col_idx;
  std::vector<std::int64_t> val_ptr;        // arena offset per stored block
  std::vector<double> values;
  std::int64_t padded_zeros = 0;            // cells added when densifying

  std::int64_t n_stored_blocks() const {
    return static_cast<std::int64_t>(block_col_idx.size());
  }
  std::int64_t stored_cells() const {
    return static_cast<std::int64_t>(values.size());
  }
  double* block(std::int64_t k) { return values.data() + val_ptr[k]; }
  const double* block(std::int64_t k) const { return values.data() + val_ptr[k]; }
  std::span<const int> row_blocks(int bi) const {
    return {block_col_idx.data() + block_row_ptr[bi],
            static_cast<std::size_t>(block_row_ptr[bi + 1] - block_row_ptr[bi])};
  }
};

// Converts to block form under a partition whose blocks are contiguous index
// ranges laid out in block_order. A block (I, J) is stored iff it contains at
// least one entry of A; missing cells inside stored blocks become explicit
// zeros and are counted in padded_zeros.
VbcsrMatrix to_vbcsr(const CsrMatrix& a, const BlockPartition& part);

// Flattens back to CSR, dropping cells that are exactly zero.
CsrMatrix vbcsr_to_csr(const VbcsrMatrix& m);

// Dense row-major copy (small matrices; for checks and last-level factors).
std::vector<double> to_dense(const VbcsrMatrix& m);

// y := M x
void spmv(const VbcsrMatrix& m, const double* x, double* y);
std::vector<double> spmv(const VbcsrMatrix& m, std::span<const double> x);

// y := y - M x
void spmv_sub(const VbcsrMatrix& m, const double* x, double* y);

// Symmetric reordering at block granularity: block (I, J) moves to
// (perm.forward[I], perm.forward[J]).
VbcsrMatrix permute_blocks(const VbcsrMatrix& m, const Permutation& block_perm);

// Copy of the block sub-panel with block rows [br0, br1) and block columns
// [bc0, bc1).
VbcsrMatrix extract_panel(const VbcsrMatrix& m, int br0, int br1, int bc0,
                          int bc1);

}  // namespace vbarms
