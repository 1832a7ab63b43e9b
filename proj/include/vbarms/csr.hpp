#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vbarms/errors.hpp"

namespace vbarms {

// Compressed sparse row matrix. Column indices are sorted and unique within
// each row; explicit zeros are legal and kept.
struct CsrMatrix {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<std::int64_t> row_ptr;  // size n_rows + 1
  std::vector<int> col_idx;
  std::vector<double> values;

  std::int64_t nnz() const { return row_ptr.empty() ? 0 : row_ptr.back(); }
  std::span<const int> row_cols(int i) const {
    return {col_idx.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
  std::span<const double> row_vals(int i) const {
    return {values.data() + row_ptr[i],
            static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i])};
  }
};

// Checks the structural invariants (monotone row_ptr, in-range sorted unique
// columns, consistent array lengths). Throws DimensionError on violation.
void validate(const CsrMatrix& a);

struct Triplet {
  int row;
  int col;
  double value;
};

// Builds a CSR matrix from unordered triplets; duplicates are summed.
CsrMatrix csr_from_triplets(int n_rows, int n_cols, std::vector<Triplet> entries);

// Row/column permutation held in both directions:
// forward[old] = new position, inverse[new] = old position.
struct Permutation {
  std::vector<int> forward;
  std::vector<int> inverse;

  int size() const { return static_cast<int>(forward.size()); }
  static Permutation identity(int n);
  static Permutation from_forward(std::vector<int> fwd);
};

// B = P A Q^T with row permutation P and column permutation Q: entry (i, j)
// of A lands at (row_perm.forward[i], col_perm.forward[j]).
CsrMatrix permute(const CsrMatrix& a, const Permutation& row_perm,
                  const Permutation& col_perm);

CsrMatrix transpose(const CsrMatrix& a);

// y := A x
void spmv(const CsrMatrix& a, const double* x, double* y);
std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x);

// Undirected pattern graph in CSR-like form. Neighbor lists are sorted and
// always contain the vertex itself.
struct AdjacencyGraph {
  int n = 0;
  std::vector<std::int64_t> ptr;
  std::vector<int> nbr;

  std::span<const int> neighbors(int u) const {
    return {nbr.data() + ptr[u],
            static_cast<std::size_t>(ptr[u + 1] - ptr[u])};
  }
};

// Pattern of A + A^T plus the full diagonal. Requires a square matrix.
AdjacencyGraph symmetrized_pattern(const CsrMatrix& a);

}  // namespace vbarms
