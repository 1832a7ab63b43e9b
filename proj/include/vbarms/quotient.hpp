#pragma once

#include <cstdint>
#include <vector>

#include "vbarms/csr.hpp"
#include "vbarms/partition.hpp"
#include "vbarms/vbcsr.hpp"

namespace vbarms {

// Quotient of an undirected pattern graph under a partition. Supernode ids
// coincide with partition block ids. Adjacency lists are sorted and include
// the supernode itself.
struct QuotientGraph {
  std::vector<std::vector<int>> supernodes;    // members, ascending
  std::vector<std::vector<int>> adjacency;     // supernode ids, incl. self
  std::vector<int> member_to_supernode;

  int n_supernodes() const { return static_cast<int>(supernodes.size()); }
  int n_vertices() const { return static_cast<int>(member_to_supernode.size()); }
};

QuotientGraph build_quotient_graph(const AdjacencyGraph& g,
                                   const BlockPartition& part);

// Quotient at block granularity of a square VBCSR matrix: one supernode per
// block (members are the contiguous row ranges), edges from the symmetrized
// block pattern plus self loops.
QuotientGraph quotient_of_blocks(const VbcsrMatrix& m);

// Wraparound sum of (neighbor index + 1) per vertex. Vertices with identical
// neighbor sets get identical keys; collisions between different sets are
// possible and must be resolved by comparing adjacency.
std::vector<std::uint64_t> checksum_keys(const AdjacencyGraph& g);

}  // namespace vbarms
