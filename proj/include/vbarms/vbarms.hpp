#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vbarms/compression.hpp"
#include "vbarms/csr.hpp"
#include "vbarms/dense.hpp"
#include "vbarms/ilut.hpp"
#include "vbarms/ordering.hpp"
#include "vbarms/partition.hpp"
#include "vbarms/vbcsr.hpp"

namespace vbarms {

struct FactorParams {
  CompressionParams compression{};
  double drop_tol = 1e-3;
  int max_levels = 4;
  int min_schur_size = 200;  // stop recursing below this many rows
  int last_level_fill = 0;   // cap on stored blocks per row side, 0 = off
  bool exact_last_level = false;  // dense LU instead of ILUT at the bottom

  void validate() const;
};

// One eliminated level: the matrix was scaled, reordered so an independent
// set of blocks leads, and the leading part factored away.
struct LevelFactor {
  int level = 0;
  int n_rows = 0;
  int m_rows = 0;    // rows in the eliminated part
  int m_blocks = 0;  // blocks in the eliminated part
  ScalingPair scaling;     // applied before the permutation
  Permutation block_perm;  // supernode reordering
  Permutation row_perm;    // the same reordering expanded to rows
  BlockLayout layout;      // layout after the reordering
  std::vector<std::vector<double>> pivot_inv;  // exact inverses of D blocks
  VbcsrMatrix g_panel;  // thresholded upper coupling (D rows x C columns)
  VbcsrMatrix w_panel;  // thresholded E D^{-1} (C rows x D columns)

  std::int64_t stored_cells() const;
};

struct LevelResult {
  LevelFactor factor;
  VbcsrMatrix schur;
};

// Partial factorization of one level: the leading m_blocks blocks must be
// pairwise uncoupled (block diagonal). Their pivots are inverted exactly,
// the Schur complement of the trailing part is assembled from the full
// coupling panels, and only then are panel blocks below drop_tol discarded.
// m_blocks == 0 is refused: such a level cannot eliminate anything.
LevelResult factorize_level(const VbcsrMatrix& m, int m_blocks,
                            double drop_tol, int level = 0);

// Multilevel factorization of a block matrix, plus everything needed to
// apply its inverse.
struct MultilevelFactor {
  int n = 0;
  std::vector<LevelFactor> levels;
  int last_n = 0;
  bool last_exact = false;
  BlockIlutFactors last_ilut;
  dense::PivotLU last_lu;
  std::int64_t nnz_precond = 0;

  // Populated when built with a protect mask: where each protected row ended
  // up in the last-level matrix and the diagonal scaling accumulated on it.
  bool tracked = false;
  std::vector<int> tracked_pos;
  std::vector<double> tracked_row_scale;
  std::vector<double> tracked_col_scale;
  VbcsrMatrix last_matrix;  // the unfactored last-level matrix

  // x := M^{-1} b. Scratch is local; concurrent calls are safe.
  void solve(const double* b, double* x) const;

  // Descends through the levels without solving the last one: keeps the
  // eliminated-part vectors per level and returns the last-level right-hand
  // side. solve() is forward_sweep + last_solve + backward_sweep.
  void forward_sweep(const double* b, std::vector<std::vector<double>>& kept,
                     std::vector<double>& g_last) const;
  void last_solve(std::vector<double>& g) const;
  void backward_sweep(const std::vector<std::vector<double>>& kept,
                      std::vector<double> z_last, double* x) const;
};

// Factorizes a block matrix level by level. Without a protect mask the
// recursion stops at params.max_levels or once the Schur complement has at
// most params.min_schur_size rows. Blocks flagged in protect_blocks are kept
// out of every independent set; elimination then continues until only
// protected blocks remain, so the last level is exactly the protected set.
MultilevelFactor factorize_blocked(VbcsrMatrix m, const FactorParams& params,
                                   const std::vector<char>* protect_blocks = nullptr);

// Compression, reordering, and multilevel factorization of a general sparse
// matrix; applies as a preconditioner in the original coordinates.
struct VbarmsPreconditioner {
  int n = 0;
  std::int64_t matrix_nnz = 0;
  BlockPartition partition;  // block structure found on A
  Permutation row_perm;      // induced block-contiguous reordering
  MultilevelFactor ml;

  // z := M^{-1} r
  void apply(const double* r, double* z) const;
  double memory_ratio() const;
};

VbarmsPreconditioner vbarms_factorize(const CsrMatrix& a,
                                      const FactorParams& params);

// Same, but reusing block structure discovered earlier.
VbarmsPreconditioner vbarms_from_partition(const CsrMatrix& a,
                                           BlockPartition part,
                                           const FactorParams& params);

std::vector<double> vbarms_solve(const VbarmsPreconditioner& m,
                                 std::span<const double> r);

}  // namespace vbarms
