#include "vbarms/ilut.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

namespace vbarms {

std::int64_t BlockIlutFactors::stored_cells() const {
  std::int64_t cells = 0;
  for (const auto& inv : pivot_inv)
    cells += static_cast<std::int64_t>(inv.size());
  for (const auto& row : lower)
    for (const auto& [j, blk] : row) cells += static_cast<std::int64_t>(blk.size());
  for (const auto& row : upper)
    for (const auto& [j, blk] : row) cells += static_cast<std::int64_t>(blk.size());
  return cells;
}

void BlockIlutFactors::solve(double* x) const {
  const int p = layout.n_blocks();
  // L y = x, unit block diagonal, ascending rows.
  for (int i = 0; i < p; ++i) {
    double* xi = x + layout.offsets[i];
    for (const auto& [k, blk] : lower[i])
      dense::gemv_sub(blk.data(), x + layout.offsets[k], xi, layout.sizes[i],
                      layout.sizes[k]);
  }
  // U z = y, descending rows, pivots applied as explicit inverses.
  std::vector<double> tmp;
  for (int i = p - 1; i >= 0; --i) {
    double* xi = x + layout.offsets[i];
    for (const auto& [j, blk] : upper[i])
      dense::gemv_sub(blk.data(), x + layout.offsets[j], xi, layout.sizes[i],
                      layout.sizes[j]);
    tmp.assign(xi, xi + layout.sizes[i]);
    dense::gemv_set(pivot_inv[i].data(), tmp.data(), xi, layout.sizes[i],
                    layout.sizes[i]);
  }
}

BlockIlutFactors block_ilut(const VbcsrMatrix& m, double drop_tol,
                            int max_row_blocks) {
  if (m.rows.n_blocks() != m.cols.n_blocks() || m.rows.total() != m.cols.total())
    throw DimensionError("block factorization requires a square block layout");
  if (drop_tol < 0.0) throw Error("drop tolerance must be nonnegative");
  const int p = m.rows.n_blocks();

  BlockIlutFactors f;
  f.layout = m.rows;
  f.lower.resize(p);
  f.upper.resize(p);
  f.pivot_inv.resize(p);

  // Row workspace: dense slot map block column -> workspace index.
  std::vector<int> slot(p, -1);
  std::vector<int> used;
  std::vector<std::vector<double>> work(p);
  std::vector<double> mult;

  for (int i = 0; i < p; ++i) {
    const int h = m.rows.sizes[i];
    used.clear();
    std::priority_queue<int, std::vector<int>, std::greater<int>> pending;
    auto ensure = [&](int j) -> std::vector<double>& {
      if (slot[j] < 0) {
        slot[j] = static_cast<int>(used.size());
        used.push_back(j);
        work[j].assign(static_cast<std::size_t>(h) * m.cols.sizes[j], 0.0);
        if (j < i) pending.push(j);
      }
      return work[j];
    };
    for (std::int64_t k = m.block_row_ptr[i]; k < m.block_row_ptr[i + 1]; ++k) {
      int j = m.block_col_idx[k];
      std::vector<double>& blk = ensure(j);
      std::copy(m.block(k),
                m.block(k) + static_cast<std::size_t>(h) * m.cols.sizes[j],
                blk.begin());
    }

    // Eliminate against factored rows in ascending block column order; fill
    // below the diagonal re-enters the queue.
    while (!pending.empty()) {
      int k = pending.top();
      pending.pop();
      const int sk = m.cols.sizes[k];
      std::vector<double>& wk = work[k];
      mult.resize(wk.size());
      dense::gemm_set(wk.data(), f.pivot_inv[k].data(), mult.data(), h, sk, sk);
      wk = mult;
      for (const auto& [j, ukj] : f.upper[k]) {
        std::vector<double>& wj = ensure(j);
        dense::gemm_sub(wk.data(), ukj.data(), wj.data(), h, sk,
                        m.cols.sizes[j]);
      }
    }

    if (slot[i] < 0)
      throw Error("block row " + std::to_string(i) +
                  " has no diagonal block to pivot on");
    dense::PivotLU lu;
    try {
      lu = dense::invert_pivot(work[i].data(), h);
    } catch (const SingularPivotError& e) {
      throw SingularPivotError(e.magnitude(), -1, i);
    }
    f.pivot_inv[i] = lu.inverse();

    // Threshold dropping once the row is complete; the pivot is exempt.
    std::sort(used.begin(), used.end());
    for (int j : used) {
      slot[j] = -1;
      if (j == i) continue;
      std::vector<double>& blk = work[j];
      const int w = m.cols.sizes[j];
      double measure = dense::frobenius_norm(blk.data(), h, w) /
                       (static_cast<double>(h) * static_cast<double>(w));
      if (measure < drop_tol) continue;
      auto& side = j < i ? f.lower[i] : f.upper[i];
      side.emplace_back(j, std::move(blk));
      work[j] = {};
    }

    if (max_row_blocks > 0) {
      auto cap = [&](std::vector<std::pair<int, std::vector<double>>>& side) {
        if (static_cast<int>(side.size()) <= max_row_blocks) return;
        std::vector<int> idx(side.size());
        for (std::size_t t = 0; t < idx.size(); ++t) idx[t] = static_cast<int>(t);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
          const auto& [ja, ba] = side[a];
          const auto& [jb, bb] = side[b];
          double ma = dense::frobenius_norm(ba.data(), h, m.cols.sizes[ja]) /
                      (static_cast<double>(h) * m.cols.sizes[ja]);
          double mb = dense::frobenius_norm(bb.data(), h, m.cols.sizes[jb]) /
                      (static_cast<double>(h) * m.cols.sizes[jb]);
          return ma > mb;
        });
        idx.resize(max_row_blocks);
        std::sort(idx.begin(), idx.end());
        std::vector<std::pair<int, std::vector<double>>> kept;
        kept.reserve(idx.size());
        for (int t : idx) kept.push_back(std::move(side[t]));
        side = std::move(kept);
      };
      cap(f.lower[i]);
      cap(f.upper[i]);
    }
  }
  return f;
}

}  // namespace vbarms
