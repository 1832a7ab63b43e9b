#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vbarms/dense.hpp"
#include "vbarms/vbcsr.hpp"

namespace vbarms {

// Incomplete block LU factors with threshold dropping. L has unit block
// diagonal and holds the multiplier blocks; U holds the strictly upper
// blocks; diagonal pivot blocks are kept as explicit inverses.
struct BlockIlutFactors {
  BlockLayout layout;
  std::vector<std::vector<std::pair<int, std::vector<double>>>> lower;
  std::vector<std::vector<std::pair<int, std::vector<double>>>> upper;
  std::vector<std::vector<double>> pivot_inv;

  std::int64_t stored_cells() const;

  // x := U^{-1} L^{-1} x
  void solve(double* x) const;
};

// Row-wise block elimination: for each block row, multipliers against
// already-factored rows are formed with the exact pivot inverses and their
// updates applied in full; once the row is complete, off-diagonal blocks B
// with ||B||_F / (rows(B) * cols(B)) < drop_tol are discarded. Pivot blocks
// are never dropped. max_row_blocks > 0 additionally caps the stored
// off-diagonal blocks per row on each side of the diagonal, keeping the
// largest by the same measure.
// Throws on a structurally missing diagonal block or a singular pivot.
BlockIlutFactors block_ilut(const VbcsrMatrix& m, double drop_tol,
                            int max_row_blocks = 0);

}  // namespace vbarms
