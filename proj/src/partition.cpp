#include "vbarms/partition.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace vbarms {

Permutation BlockPartition::induced_permutation() const {
  std::vector<int> fwd(n);
  int pos = 0;
  for (int b : block_order) {
    for (int i : members(b)) fwd[i] = pos++;
  }
  return Permutation::from_forward(std::move(fwd));
}

BlockPartition make_partition(int n, std::vector<int> block_of) {
  if (static_cast<int>(block_of.size()) != n)
    throw DimensionError("block assignment length does not match n");
  int p = 0;
  for (int b : block_of) {
    if (b < 0) throw DimensionError("negative block id");
    p = std::max(p, b + 1);
  }
  BlockPartition part;
  part.n = n;
  part.block_sizes.assign(p, 0);
  for (int b : block_of) ++part.block_sizes[b];
  for (int b = 0; b < p; ++b) {
    if (part.block_sizes[b] == 0)
      throw DimensionError("block ids not dense: id " + std::to_string(b) +
                           " unused");
  }
  part.member_ptr.assign(p + 1, 0);
  for (int b = 0; b < p; ++b)
    part.member_ptr[b + 1] = part.member_ptr[b] + part.block_sizes[b];
  part.members_flat.resize(n);
  std::vector<std::int64_t> next(part.member_ptr.begin(),
                                 part.member_ptr.end() - 1);
  part.block_order.reserve(p);
  std::vector<char> seen(p, 0);
  for (int i = 0; i < n; ++i) {
    int b = block_of[i];
    part.members_flat[next[b]++] = i;
    if (!seen[b]) {
      seen[b] = 1;
      part.block_order.push_back(b);
    }
  }
  part.block_of = std::move(block_of);
  return part;
}

BlockPartition singleton_partition(int n) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return make_partition(n, std::move(ids));
}

BlockPartition contiguous_partition(const std::vector<int>& sizes) {
  std::vector<int> ids;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (sizes[b] <= 0) throw DimensionError("block size must be positive");
    ids.insert(ids.end(), sizes[b], static_cast<int>(b));
  }
  const int n = static_cast<int>(ids.size());
  return make_partition(n, std::move(ids));
}

BlockPartition permuted_contiguous(const BlockPartition& part) {
  std::vector<int> sizes;
  sizes.reserve(part.n_blocks());
  for (int b : part.block_order) sizes.push_back(part.block_sizes[b]);
  return contiguous_partition(sizes);
}

BlockMetrics block_metrics(const CsrMatrix& a, const BlockPartition& part) {
  if (a.n_rows != a.n_cols)
    throw DimensionError("block metrics require a square matrix");
  if (part.n != a.n_rows)
    throw DimensionError("partition does not cover the matrix");
  BlockMetrics m;
  m.n_blocks = part.n_blocks();
  m.average_block_size =
      m.n_blocks > 0 ? static_cast<double>(part.n) / m.n_blocks : 0.0;
  std::vector<int> stamp(part.n_blocks(), -1);
  for (int bi = 0; bi < part.n_blocks(); ++bi) {
    auto rows = part.members(bi);
    for (int i : rows) {
      for (int j : a.row_cols(i)) {
        int bj = part.block_of[j];
        if (stamp[bj] != bi) {
          stamp[bj] = bi;
          m.covered_cells += static_cast<std::int64_t>(rows.size()) *
                             part.block_sizes[bj];
        }
      }
    }
  }
  m.padded_zeros = m.covered_cells - a.nnz();
  m.average_block_density =
      m.covered_cells > 0
          ? static_cast<double>(a.nnz()) / static_cast<double>(m.covered_cells)
          : 0.0;
  return m;
}

void write_partition(std::ostream& os, const BlockPartition& part) {
  for (int i = 0; i < part.n; ++i) os << part.block_of[i] << '\n';
}

BlockPartition read_partition(std::istream& is, int n) {
  std::vector<int> ids;
  ids.reserve(n);
  long val;
  while (static_cast<int>(ids.size()) < n && is >> val)
    ids.push_back(static_cast<int>(val));
  if (static_cast<int>(ids.size()) != n)
    throw ParseError("partition file ended after " +
                     std::to_string(ids.size()) + " of " + std::to_string(n) +
                     " entries");
  return make_partition(n, std::move(ids));
}

}  // namespace vbarms
