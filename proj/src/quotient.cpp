#include "vbarms/quotient.hpp"

#include <algorithm>
#include <numeric>

namespace vbarms {

QuotientGraph build_quotient_graph(const AdjacencyGraph& g,
                                   const BlockPartition& part) {
  if (part.n != g.n)
    throw DimensionError("partition does not cover the graph");
  QuotientGraph q;
  const int p = part.n_blocks();
  q.member_to_supernode = part.block_of;
  q.supernodes.resize(p);
  for (int b = 0; b < p; ++b) {
    auto mem = part.members(b);
    q.supernodes[b].assign(mem.begin(), mem.end());
  }
  q.adjacency.resize(p);
  for (int b = 0; b < p; ++b) {
    std::vector<int>& adj = q.adjacency[b];
    for (int u : q.supernodes[b]) {
      for (int w : g.neighbors(u)) adj.push_back(part.block_of[w]);
    }
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return q;
}

QuotientGraph quotient_of_blocks(const VbcsrMatrix& m) {
  if (m.rows.n_blocks() != m.cols.n_blocks() ||
      m.rows.total() != m.cols.total())
    throw DimensionError("block quotient requires a square block layout");
  const int p = m.rows.n_blocks();
  QuotientGraph q;
  q.supernodes.resize(p);
  q.member_to_supernode.resize(m.rows.total());
  for (int b = 0; b < p; ++b) {
    q.supernodes[b].resize(m.rows.sizes[b]);
    std::iota(q.supernodes[b].begin(), q.supernodes[b].end(),
              m.rows.offsets[b]);
    for (int i = m.rows.offsets[b]; i < m.rows.offsets[b + 1]; ++i)
      q.member_to_supernode[i] = b;
  }
  q.adjacency.resize(p);
  for (int bi = 0; bi < p; ++bi) {
    q.adjacency[bi].push_back(bi);
    for (int bj : m.row_blocks(bi)) {
      if (bj != bi) {
        q.adjacency[bi].push_back(bj);
        q.adjacency[bj].push_back(bi);
      }
    }
  }
  for (int b = 0; b < p; ++b) {
    std::vector<int>& adj = q.adjacency[b];
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return q;
}

std::vector<std::uint64_t> checksum_keys(const AdjacencyGraph& g) {
  std::vector<std::uint64_t> keys(g.n, 0);
  for (int u = 0; u < g.n; ++u) {
    std::uint64_t s = 0;
    for (int w : g.neighbors(u)) s += static_cast<std::uint64_t>(w) + 1;
    keys[u] = s;
  }
  return keys;
}

}  // namespace vbarms
