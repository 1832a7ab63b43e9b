#include "vbarms/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vbarms {

ScalingPair scale_in_place(CsrMatrix& a) {
  ScalingPair s;
  s.row_scale.assign(a.n_rows, 0.0);
  s.col_scale.assign(a.n_cols, 0.0);
  for (int i = 0; i < a.n_rows; ++i) {
    double m = 0.0;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      m = std::max(m, std::fabs(a.values[k]));
    if (m == 0.0) throw SingularScalingError("empty row", i);
    s.row_scale[i] = 1.0 / m;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      a.values[k] *= s.row_scale[i];
  }
  for (std::int64_t k = 0; k < a.nnz(); ++k)
    s.col_scale[a.col_idx[k]] =
        std::max(s.col_scale[a.col_idx[k]], std::fabs(a.values[k]));
  for (int j = 0; j < a.n_cols; ++j) {
    if (s.col_scale[j] == 0.0) throw SingularScalingError("empty column", j);
    s.col_scale[j] = 1.0 / s.col_scale[j];
  }
  for (std::int64_t k = 0; k < a.nnz(); ++k)
    a.values[k] *= s.col_scale[a.col_idx[k]];
  return s;
}

ScalingPair scale_in_place(VbcsrMatrix& m) {
  const int nr = m.rows.total();
  const int nc = m.cols.total();
  ScalingPair s;
  s.row_scale.assign(nr, 0.0);
  s.col_scale.assign(nc, 0.0);
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int r0 = m.rows.offsets[bi];
    const int h = m.rows.sizes[bi];
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      const int w = m.cols.sizes[m.block_col_idx[k]];
      const double* blk = m.block(k);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          s.row_scale[r0 + r] = std::max(
              s.row_scale[r0 + r],
              std::fabs(blk[static_cast<std::int64_t>(r) * w + c]));
    }
  }
  for (int i = 0; i < nr; ++i) {
    if (s.row_scale[i] == 0.0) throw SingularScalingError("empty row", i);
    s.row_scale[i] = 1.0 / s.row_scale[i];
  }
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int r0 = m.rows.offsets[bi];
    const int h = m.rows.sizes[bi];
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      const int bj = m.block_col_idx[k];
      const int c0 = m.cols.offsets[bj];
      const int w = m.cols.sizes[bj];
      double* blk = m.block(k);
      for (int r = 0; r < h; ++r) {
        const double rs = s.row_scale[r0 + r];
        for (int c = 0; c < w; ++c) {
          double v = blk[static_cast<std::int64_t>(r) * w + c] * rs;
          blk[static_cast<std::int64_t>(r) * w + c] = v;
          s.col_scale[c0 + c] = std::max(s.col_scale[c0 + c], std::fabs(v));
        }
      }
    }
  }
  for (int j = 0; j < nc; ++j) {
    if (s.col_scale[j] == 0.0) throw SingularScalingError("empty column", j);
    s.col_scale[j] = 1.0 / s.col_scale[j];
  }
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int h = m.rows.sizes[bi];
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      const int bj = m.block_col_idx[k];
      const int c0 = m.cols.offsets[bj];
      const int w = m.cols.sizes[bj];
      double* blk = m.block(k);
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          blk[static_cast<std::int64_t>(r) * w + c] *= s.col_scale[c0 + c];
    }
  }
  return s;
}

IndependentSetOrdering block_independent_set(const QuotientGraph& q) {
  return block_independent_set(q, std::vector<char>(q.n_supernodes(), 0));
}

IndependentSetOrdering block_independent_set(const QuotientGraph& q,
                                             const std::vector<char>& excluded) {
  const int p = q.n_supernodes();
  if (static_cast<int>(excluded.size()) != p)
    throw DimensionError("exclusion mask size mismatch");
  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> degree(p);
  for (int b = 0; b < p; ++b) {
    int d = static_cast<int>(q.adjacency[b].size());
    // Self loop does not count toward the degree.
    if (std::binary_search(q.adjacency[b].begin(), q.adjacency[b].end(), b))
      --d;
    degree[b] = d;
  }
  std::sort(order.begin(), order.end(), [&](int u, int w) {
    return degree[u] != degree[w] ? degree[u] < degree[w] : u < w;
  });

  std::vector<char> marked(p, 0);
  std::vector<int> picked;
  picked.reserve(p);
  for (int b : order) {
    if (marked[b] || excluded[b]) continue;
    picked.push_back(b);
    for (int v : q.adjacency[b]) marked[v] = 1;
  }

  IndependentSetOrdering iso;
  iso.independent_blocks = static_cast<int>(picked.size());
  std::vector<int> fwd(p, -1);
  int pos = 0;
  for (int b : picked) {
    fwd[b] = pos++;
    iso.independent_rows += static_cast<int>(q.supernodes[b].size());
  }
  for (int b = 0; b < p; ++b)
    if (fwd[b] < 0) fwd[b] = pos++;
  iso.supernode_perm = Permutation::from_forward(std::move(fwd));
  return iso;
}

}  // namespace vbarms
