#pragma once

#include <vector>

#include "vbarms/csr.hpp"
#include "vbarms/quotient.hpp"
#include "vbarms/vbcsr.hpp"

namespace vbarms {

// Two-sided diagonal scaling S1 A S2. Applied as computed: S1 normalizes row
// maxima to one, S2 then normalizes column maxima of the row-scaled matrix,
// so every entry of |S1 A S2| ends at or below one.
struct ScalingPair {
  std::vector<double> row_scale;
  std::vector<double> col_scale;
};

// Scales in place and returns the applied factors. A structurally (or
// numerically) empty row or column raises SingularScalingError naming the
// index.
ScalingPair scale_in_place(CsrMatrix& a);
ScalingPair scale_in_place(VbcsrMatrix& m);

// Reordering that moves an independent set of supernodes to the front.
struct IndependentSetOrdering {
  Permutation supernode_perm;
  int independent_blocks = 0;  // supernodes in the independent set
  int independent_rows = 0;    // their total member count
};

// Greedy traversal by ascending degree (ties by id): an unmarked supernode
// joins the set and marks its neighbors. Set members keep pick order at the
// front; the rest follow by ascending id. No two set members are adjacent.
IndependentSetOrdering block_independent_set(const QuotientGraph& q);

// Same, but supernodes flagged in `excluded` never enter the set (they may
// still be marked). Used when boundary blocks must stay in the coupled part.
IndependentSetOrdering block_independent_set(const QuotientGraph& q,
                                             const std::vector<char>& excluded);

}  // namespace vbarms
