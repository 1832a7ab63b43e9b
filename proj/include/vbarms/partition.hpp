#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "vbarms/csr.hpp"

namespace vbarms {

// Partition of the index set {0..n-1} into blocks (supernodes). Block ids are
// dense in [0, n_blocks). Members of each block are listed ascending.
// block_order lists block ids in the order the induced permutation lays them
// out.
struct BlockPartition {
  int n = 0;
  std::vector<int> block_of;               // index -> block id
  std::vector<int> block_sizes;            // per block id
  std::vector<int> block_order;            // layout order of block ids
  std::vector<std::int64_t> member_ptr;    // size n_blocks + 1
  std::vector<int> members_flat;           // concatenated ascending members

  int n_blocks() const { return static_cast<int>(block_sizes.size()); }
  std::span<const int> members(int b) const {
    return {members_flat.data() + member_ptr[b],
            static_cast<std::size_t>(member_ptr[b + 1] - member_ptr[b])};
  }

  // Permutation placing blocks consecutively in block_order, members
  // ascending inside each block.
  Permutation induced_permutation() const;
};

// Builds a partition from a dense id assignment. Ids must cover 0..max
// without gaps. block_order follows first appearance when scanning indices
// ascending.
BlockPartition make_partition(int n, std::vector<int> block_of);

BlockPartition singleton_partition(int n);

// Blocks 0..p-1 laid out consecutively with the given sizes.
BlockPartition contiguous_partition(const std::vector<int>& sizes);

// The partition seen by permute(a, p, p) with p = part.induced_permutation():
// same blocks renumbered to be contiguous in layout order.
BlockPartition permuted_contiguous(const BlockPartition& part);

struct BlockMetrics {
  double average_block_density = 0.0;  // nnz over cells of touched blocks
  double average_block_size = 0.0;     // n over number of blocks
  int n_blocks = 0;
  std::int64_t covered_cells = 0;
  std::int64_t padded_zeros = 0;
};

// Density metrics of A under a partition of its (square) index set. Works
// for any partition; blocks need not be contiguous.
BlockMetrics block_metrics(const CsrMatrix& a, const BlockPartition& part);

// Text form: one block id per index, line by line.
void write_partition(std::ostream& os, const BlockPartition& part);
BlockPartition read_partition(std::istream& is, int n);

}  // namespace vbarms
