#include "vbarms/csr.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace vbarms {

void validate(const CsrMatrix& a) {
  if (a.n_rows < 0 || a.n_cols < 0)
    throw DimensionError("negative matrix dimension");
  if (static_cast<int>(a.row_ptr.size()) != a.n_rows + 1)
    throw DimensionError("row_ptr has size " + std::to_string(a.row_ptr.size()) +
                         ", expected " + std::to_string(a.n_rows + 1));
  if (!a.row_ptr.empty() && a.row_ptr.front() != 0)
    throw DimensionError("row_ptr must start at 0");
  if (a.col_idx.size() != a.values.size())
    throw DimensionError("col_idx and values lengths differ");
  if (!a.row_ptr.empty() &&
      a.row_ptr.back() != static_cast<std::int64_t>(a.col_idx.size()))
    throw DimensionError("row_ptr end does not match nnz");
  for (int i = 0; i < a.n_rows; ++i) {
    if (a.row_ptr[i + 1] < a.row_ptr[i])
      throw DimensionError("row_ptr not monotone at row " + std::to_string(i));
    int prev = -1;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      int c = a.col_idx[k];
      if (c < 0 || c >= a.n_cols)
        throw DimensionError("column " + std::to_string(c) +
                             " out of range in row " + std::to_string(i));
      if (c <= prev)
        throw DimensionError("columns not sorted/unique in row " +
                             std::to_string(i));
      prev = c;
    }
  }
}

CsrMatrix csr_from_triplets(int n_rows, int n_cols,
                            std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw DimensionError("triplet (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ") out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& x, const Triplet& y) {
              return x.row != y.row ? x.row < y.row : x.col < y.col;
            });
  CsrMatrix a;
  a.n_rows = n_rows;
  a.n_cols = n_cols;
  a.row_ptr.assign(n_rows + 1, 0);
  a.col_idx.reserve(entries.size());
  a.values.reserve(entries.size());
  std::size_t k = 0;
  for (int i = 0; i < n_rows; ++i) {
    while (k < entries.size() && entries[k].row == i) {
      int c = entries[k].col;
      double v = entries[k].value;
      ++k;
      while (k < entries.size() && entries[k].row == i && entries[k].col == c) {
        v += entries[k].value;  // duplicates accumulate
        ++k;
      }
      a.col_idx.push_back(c);
      a.values.push_back(v);
    }
    a.row_ptr[i + 1] = static_cast<std::int64_t>(a.col_idx.size());
  }
  return a;
}

Permutation Permutation::identity(int n) {
  Permutation p;
  p.forward.resize(n);
  p.inverse.resize(n);
  std::iota(p.forward.begin(), p.forward.end(), 0);
  p.inverse = p.forward;
  return p;
}

Permutation Permutation::from_forward(std::vector<int> fwd) {
  const int n = static_cast<int>(fwd.size());
  Permutation p;
  p.inverse.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    int f = fwd[i];
    if (f < 0 || f >= n || p.inverse[f] != -1)
      throw DimensionError("forward map is not a permutation");
    p.inverse[f] = i;
  }
  p.forward = std::move(fwd);
  return p;
}

CsrMatrix permute(const CsrMatrix& a, const Permutation& row_perm,
                  const Permutation& col_perm) {
  if (row_perm.size() != a.n_rows || col_perm.size() != a.n_cols)
    throw DimensionError("permutation size does not match matrix");
  CsrMatrix b;
  b.n_rows = a.n_rows;
  b.n_cols = a.n_cols;
  b.row_ptr.assign(a.n_rows + 1, 0);
  b.col_idx.resize(a.nnz());
  b.values.resize(a.nnz());
  for (int i = 0; i < a.n_rows; ++i)
    b.row_ptr[row_perm.forward[i] + 1] = a.row_ptr[i + 1] - a.row_ptr[i];
  for (int i = 0; i < a.n_rows; ++i) b.row_ptr[i + 1] += b.row_ptr[i];
  std::vector<std::pair<int, double>> row;
  for (int ni = 0; ni < b.n_rows; ++ni) {
    int oi = row_perm.inverse[ni];
    row.clear();
    for (std::int64_t k = a.row_ptr[oi]; k < a.row_ptr[oi + 1]; ++k)
      row.emplace_back(col_perm.forward[a.col_idx[k]], a.values[k]);
    std::sort(row.begin(), row.end());
    std::int64_t out = b.row_ptr[ni];
    for (const auto& [c, v] : row) {
      b.col_idx[out] = c;
      b.values[out] = v;
      ++out;
    }
  }
  return b;
}

CsrMatrix transpose(const CsrMatrix& a) {
  CsrMatrix t;
  t.n_rows = a.n_cols;
  t.n_cols = a.n_rows;
  t.row_ptr.assign(t.n_rows + 1, 0);
  t.col_idx.resize(a.nnz());
  t.values.resize(a.nnz());
  for (std::int64_t k = 0; k < a.nnz(); ++k) ++t.row_ptr[a.col_idx[k] + 1];
  for (int i = 0; i < t.n_rows; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int i = 0; i < a.n_rows; ++i) {
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      std::int64_t out = next[a.col_idx[k]]++;
      t.col_idx[out] = i;  // rows of A visited in order, so columns stay sorted
      t.values[out] = a.values[k];
    }
  }
  return t;
}

void spmv(const CsrMatrix& a, const double* x, double* y) {
  for (int i = 0; i < a.n_rows; ++i) {
    double s = 0.0;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      s += a.values[k] * x[a.col_idx[k]];
    y[i] = s;
  }
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
  if (static_cast<int>(x.size()) != a.n_cols)
    throw DimensionError("spmv operand has wrong length");
  std::vector<double> y(a.n_rows);
  spmv(a, x.data(), y.data());
  return y;
}

AdjacencyGraph symmetrized_pattern(const CsrMatrix& a) {
  if (a.n_rows != a.n_cols)
    throw DimensionError("symmetrized pattern requires a square matrix");
  const int n = a.n_rows;
  std::vector<std::int64_t> count(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    count[i + 1] += a.row_ptr[i + 1] - a.row_ptr[i] + 1;  // row + self
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      ++count[a.col_idx[k] + 1];  // mirrored entry
  }
  for (int i = 0; i < n; ++i) count[i + 1] += count[i];
  std::vector<int> buf(count[n]);
  std::vector<std::int64_t> next(count.begin(), count.end() - 1);
  for (int i = 0; i < n; ++i) {
    buf[next[i]++] = i;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      int j = a.col_idx[k];
      buf[next[i]++] = j;
      buf[next[j]++] = i;
    }
  }
  AdjacencyGraph g;
  g.n = n;
  g.ptr.assign(n + 1, 0);
  g.nbr.reserve(buf.size());
  for (int i = 0; i < n; ++i) {
    auto first = buf.begin() + count[i];
    auto last = buf.begin() + count[i + 1];
    std::sort(first, last);
    auto end = std::unique(first, last);
    for (auto it = first; it != end; ++it) g.nbr.push_back(*it);
    g.ptr[i + 1] = static_cast<std::int64_t>(g.nbr.size());
  }
  return g;
}

}  // namespace vbarms
