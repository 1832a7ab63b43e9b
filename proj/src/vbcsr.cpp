#include "vbarms/vbcsr.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "vbarms/dense.hpp"

namespace vbarms {

BlockLayout BlockLayout::from_sizes(std::vector<int> sizes) {
  BlockLayout l;
  l.offsets.resize(sizes.size() + 1);
  l.offsets[0] = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (sizes[b] <= 0) throw DimensionError("block size must be positive");
    l.offsets[b + 1] = l.offsets[b] + sizes[b];
  }
  l.sizes = std::move(sizes);
  return l;
}

VbcsrMatrix to_vbcsr(const CsrMatrix& a, const BlockPartition& part) {
  if (a.n_rows != a.n_cols)
    throw DimensionError("block conversion requires a square matrix");
  if (part.n != a.n_rows)
    throw DimensionError("partition does not cover the matrix");

  const int p = part.n_blocks();
  std::vector<int> sizes;
  sizes.reserve(p);
  std::vector<int> pos_of(p, -1);
  int pos = 0;
  int offset = 0;
  for (int b : part.block_order) {
    auto mem = part.members(b);
    const int sz = part.block_sizes[b];
    if (mem.front() != offset || mem.back() != offset + sz - 1)
      throw DimensionError("partition blocks are not contiguous index ranges");
    pos_of[b] = pos++;
    offset += sz;
    sizes.push_back(sz);
  }

  VbcsrMatrix m;
  m.rows = BlockLayout::from_sizes(sizes);
  m.cols = m.rows;
  m.block_row_ptr.assign(p + 1, 0);

  std::vector<int> stamp(p, -1);
  std::vector<int> cols_here;
  std::vector<int> slot_of(p, -1);
  for (int bi = 0; bi < p; ++bi) {
    const int r0 = m.rows.offsets[bi];
    const int r1 = m.rows.offsets[bi + 1];
    cols_here.clear();
    for (int i = r0; i < r1; ++i) {
      for (int j : a.row_cols(i)) {
        int bj = pos_of[part.block_of[j]];
        if (stamp[bj] != bi) {
          stamp[bj] = bi;
          cols_here.push_back(bj);
        }
      }
    }
    std::sort(cols_here.begin(), cols_here.end());
    for (int bj : cols_here) {
      m.block_col_idx.push_back(bj);
      m.val_ptr.push_back(static_cast<std::int64_t>(m.values.size()));
      m.values.resize(m.values.size() +
                      static_cast<std::size_t>(r1 - r0) * m.cols.sizes[bj]);
    }
    m.block_row_ptr[bi + 1] = static_cast<std::int64_t>(m.block_col_idx.size());

    // Second pass over the same rows writes the entries.
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1]; ++k)
      slot_of[m.block_col_idx[k]] = static_cast<int>(k);
    for (int i = r0; i < r1; ++i) {
      auto cols = a.row_cols(i);
      auto vals = a.row_vals(i);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        int j = cols[e];
        int bj = pos_of[part.block_of[j]];
        std::int64_t k = slot_of[bj];
        int bw = m.cols.sizes[bj];
        m.values[m.val_ptr[k] +
                 static_cast<std::int64_t>(i - r0) * bw +
                 (j - m.cols.offsets[bj])] = vals[e];
      }
    }
  }
  m.padded_zeros = m.stored_cells() - a.nnz();
  return m;
}

CsrMatrix vbcsr_to_csr(const VbcsrMatrix& m) {
  CsrMatrix a;
  a.n_rows = m.rows.total();
  a.n_cols = m.cols.total();
  a.row_ptr.assign(a.n_rows + 1, 0);
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int r0 = m.rows.offsets[bi];
    const int h = m.rows.sizes[bi];
    for (int r = 0; r < h; ++r) {
      for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
           ++k) {
        int bj = m.block_col_idx[k];
        const int w = m.cols.sizes[bj];
        const double* blk = m.block(k) + static_cast<std::int64_t>(r) * w;
        for (int c = 0; c < w; ++c) {
          if (blk[c] != 0.0) {
            a.col_idx.push_back(m.cols.offsets[bj] + c);
            a.values.push_back(blk[c]);
          }
        }
      }
      a.row_ptr[r0 + r + 1] = static_cast<std::int64_t>(a.col_idx.size());
    }
  }
  return a;
}

std::vector<double> to_dense(const VbcsrMatrix& m) {
  const std::int64_t nr = m.rows.total();
  const std::int64_t nc = m.cols.total();
  std::vector<double> d(nr * nc, 0.0);
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int r0 = m.rows.offsets[bi];
    const int h = m.rows.sizes[bi];
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      int bj = m.block_col_idx[k];
      const int c0 = m.cols.offsets[bj];
      const int w = m.cols.sizes[bj];
      for (int r = 0; r < h; ++r)
        std::memcpy(d.data() + (r0 + r) * nc + c0,
                    m.block(k) + static_cast<std::int64_t>(r) * w,
                    sizeof(double) * w);
    }
  }
  return d;
}

void spmv(const VbcsrMatrix& m, const double* x, double* y) {
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int h = m.rows.sizes[bi];
    double* yi = y + m.rows.offsets[bi];
    std::memset(yi, 0, sizeof(double) * h);
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      int bj = m.block_col_idx[k];
      dense::gemv_add(m.block(k), x + m.cols.offsets[bj], yi, h,
                      m.cols.sizes[bj]);
    }
  }
}

std::vector<double> spmv(const VbcsrMatrix& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.cols.total())
    throw DimensionError("spmv operand has wrong length");
  std::vector<double> y(m.rows.total());
  spmv(m, x.data(), y.data());
  return y;
}

void spmv_sub(const VbcsrMatrix& m, const double* x, double* y) {
  for (int bi = 0; bi < m.rows.n_blocks(); ++bi) {
    const int h = m.rows.sizes[bi];
    double* yi = y + m.rows.offsets[bi];
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      int bj = m.block_col_idx[k];
      dense::gemv_sub(m.block(k), x + m.cols.offsets[bj], yi, h,
                      m.cols.sizes[bj]);
    }
  }
}

VbcsrMatrix permute_blocks(const VbcsrMatrix& m, const Permutation& block_perm) {
  if (block_perm.size() != m.rows.n_blocks() ||
      m.rows.n_blocks() != m.cols.n_blocks())
    throw DimensionError("block permutation size mismatch");
  const int p = m.rows.n_blocks();
  std::vector<int> sizes(p);
  for (int nb = 0; nb < p; ++nb) sizes[nb] = m.rows.sizes[block_perm.inverse[nb]];
  VbcsrMatrix out;
  out.rows = BlockLayout::from_sizes(sizes);
  out.cols = out.rows;
  out.block_row_ptr.assign(p + 1, 0);
  out.padded_zeros = m.padded_zeros;
  std::vector<std::pair<int, std::int64_t>> row;
  for (int nb = 0; nb < p; ++nb) {
    int ob = block_perm.inverse[nb];
    row.clear();
    for (std::int64_t k = m.block_row_ptr[ob]; k < m.block_row_ptr[ob + 1]; ++k)
      row.emplace_back(block_perm.forward[m.block_col_idx[k]], k);
    std::sort(row.begin(), row.end());
    for (const auto& [nc, k] : row) {
      std::int64_t cells = static_cast<std::int64_t>(m.rows.sizes[ob]) *
                           m.cols.sizes[m.block_col_idx[k]];
      out.block_col_idx.push_back(nc);
      out.val_ptr.push_back(static_cast<std::int64_t>(out.values.size()));
      out.values.insert(out.values.end(), m.block(k), m.block(k) + cells);
    }
    out.block_row_ptr[nb + 1] = static_cast<std::int64_t>(out.block_col_idx.size());
  }
  return out;
}

VbcsrMatrix extract_panel(const VbcsrMatrix& m, int br0, int br1, int bc0,
                          int bc1) {
  if (br0 < 0 || br1 > m.rows.n_blocks() || bc0 < 0 || bc1 > m.cols.n_blocks() ||
      br0 > br1 || bc0 > bc1)
    throw DimensionError("panel block range out of bounds");
  VbcsrMatrix out;
  out.rows = BlockLayout::from_sizes(
      std::vector<int>(m.rows.sizes.begin() + br0, m.rows.sizes.begin() + br1));
  out.cols = BlockLayout::from_sizes(
      std::vector<int>(m.cols.sizes.begin() + bc0, m.cols.sizes.begin() + bc1));
  out.block_row_ptr.assign(br1 - br0 + 1, 0);
  for (int bi = br0; bi < br1; ++bi) {
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      int bj = m.block_col_idx[k];
      if (bj < bc0 || bj >= bc1) continue;
      std::int64_t cells = static_cast<std::int64_t>(m.rows.sizes[bi]) *
                           m.cols.sizes[bj];
      out.block_col_idx.push_back(bj - bc0);
      out.val_ptr.push_back(static_cast<std::int64_t>(out.values.size()));
      out.values.insert(out.values.end(), m.block(k), m.block(k) + cells);
    }
    out.block_row_ptr[bi - br0 + 1] =
        static_cast<std::int64_t>(out.block_col_idx.size());
  }
  return out;
}

}  // namespace vbarms
