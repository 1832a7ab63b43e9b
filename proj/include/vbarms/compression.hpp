#pragma once

#include <cstdint>
#include <string>

#include "vbarms/csr.hpp"
#include "vbarms/partition.hpp"
#include "vbarms/quotient.hpp"

namespace vbarms {

enum class CompressionMethod { checksum, angle, graph };

std::string to_string(CompressionMethod m);
CompressionMethod compression_method_from_string(const std::string& s);

struct CompressionParams {
  CompressionMethod method = CompressionMethod::graph;
  double tau = 0.8;  // cosine threshold, angle method
  double mu = 0.7;   // density floor, graph method

  void validate() const;
};

// Groups indices with identical rows in the symmetrized self-looped pattern.
// Checksum keys prefilter candidates; equal keys are confirmed by comparing
// full adjacency lists, so the grouping is exact.
BlockPartition exact_blocking(const AdjacencyGraph& g);

// Two-pass pattern clustering. Pass one groups identical patterns. Pass two
// re-scans rows still alone and joins the first existing group whose
// representative pattern is close enough: |p_i . p_r|^2 >= tau^2 |p_i| |p_r|,
// where patterns come from the symmetrized self-looped graph and the
// representative is the group's lowest pass-one member. tau = 1 reduces to
// exact grouping.
BlockPartition angle_blocking(const CsrMatrix& a, double tau);

struct GraphBlockingResult {
  BlockPartition partition;
  double final_av_bd = 0.0;          // incrementally maintained value
  std::int64_t covered_cells = 0;    // cells of block-covered pattern pairs
  std::int64_t pattern_nnz = 0;      // nonzeros of the symmetrized pattern
};

// Greedy supernode merging on the quotient graph of the exact blocking.
// Supernodes are scanned in creation order; an adjacent pair is merged while
// the global average block density of the symmetrized self-looped pattern
// stays at or above mu. The density is maintained incrementally and matches
// a from-scratch recomputation exactly.
GraphBlockingResult graph_blocking_detailed(const CsrMatrix& a, double mu);
BlockPartition graph_blocking(const CsrMatrix& a, double mu);

// From-scratch density of a pattern graph under a partition: pattern nnz over
// the cells of all block pairs holding at least one pattern entry.
double pattern_av_bd(const AdjacencyGraph& g, const BlockPartition& part);

// Dispatch on params.method.
BlockPartition compress(const CsrMatrix& a, const CompressionParams& params);

}  // namespace vbarms
