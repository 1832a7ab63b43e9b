#include "vbarms/vbarms.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "vbarms/quotient.hpp"

namespace vbarms {

void FactorParams::validate() const {
  compression.validate();
  if (drop_tol < 0.0) throw Error("drop tolerance must be nonnegative");
  if (max_levels < 0) throw Error("level limit must be nonnegative");
  if (min_schur_size < 0) throw Error("Schur size floor must be nonnegative");
  if (last_level_fill < 0) throw Error("fill cap must be nonnegative");
}

std::int64_t LevelFactor::stored_cells() const {
  std::int64_t cells = 0;
  for (const auto& inv : pivot_inv)
    cells += static_cast<std::int64_t>(inv.size());
  return cells + g_panel.stored_cells() + w_panel.stored_cells();
}

namespace {

BlockLayout sub_layout(const BlockLayout& l, int b0, int b1) {
  return BlockLayout::from_sizes(
      std::vector<int>(l.sizes.begin() + b0, l.sizes.begin() + b1));
}

}  // namespace

LevelResult factorize_level(const VbcsrMatrix& m, int m_blocks,
                            double drop_tol, int level) {
  const int p = m.rows.n_blocks();
  if (p != m.cols.n_blocks() || m.rows.total() != m.cols.total())
    throw DimensionError("level factorization requires a square block layout");
  if (m_blocks <= 0) throw Error("degenerate level: the independent set is empty");
  if (m_blocks > p) throw DimensionError("independent part exceeds the matrix");
  if (drop_tol < 0.0) throw Error("drop tolerance must be nonnegative");

  LevelResult out;
  LevelFactor& f = out.factor;
  f.level = level;
  f.n_rows = m.rows.total();
  f.m_blocks = m_blocks;
  f.m_rows = m.rows.offsets[m_blocks];
  f.layout = m.rows;
  f.pivot_inv.resize(m_blocks);

  const int pc = p - m_blocks;

  // Leading part: must be block diagonal; invert each pivot, remember the
  // full F blocks per row for the Schur product.
  std::vector<std::vector<std::pair<int, const double*>>> frow(m_blocks);
  for (int bi = 0; bi < m_blocks; ++bi) {
    bool has_diag = false;
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      const int bj = m.block_col_idx[k];
      if (bj < m_blocks) {
        if (bj != bi)
          throw DimensionError("independent-set blocks " + std::to_string(bi) +
                               " and " + std::to_string(bj) + " are coupled");
        has_diag = true;
        try {
          f.pivot_inv[bi] = dense::invert_pivot(m.block(k), m.rows.sizes[bi]).inverse();
        } catch (const SingularPivotError& e) {
          throw SingularPivotError(e.magnitude(), level, bi);
        }
      } else {
        frow[bi].emplace_back(bj - m_blocks, m.block(k));
      }
    }
    if (!has_diag)
      throw Error("block row " + std::to_string(bi) +
                  " has no diagonal block at level " + std::to_string(level));
  }

  // Trailing part: full multipliers W = E D^{-1} per block row.
  std::vector<std::vector<std::pair<int, std::vector<double>>>> wfull(pc);
  for (int I = 0; I < pc; ++I) {
    const int bi = m_blocks + I;
    const int h = m.rows.sizes[bi];
    for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
         ++k) {
      const int bj = m.block_col_idx[k];
      if (bj >= m_blocks) continue;
      const int s = m.rows.sizes[bj];
      std::vector<double> w(static_cast<std::size_t>(h) * s);
      dense::gemm_set(m.block(k), f.pivot_inv[bj].data(), w.data(), h, s, s);
      wfull[I].emplace_back(bj, std::move(w));
    }
  }

  // Schur complement from the full panels.
  VbcsrMatrix& s = out.schur;
  s.rows = sub_layout(m.rows, m_blocks, p);
  s.cols = s.rows;
  s.block_row_ptr.assign(pc + 1, 0);
  {
    std::vector<char> present(pc, 0);
    std::vector<int> cols_here;
    std::vector<std::vector<double>> acc(pc);
    for (int I = 0; I < pc; ++I) {
      const int bi = m_blocks + I;
      const int h = m.rows.sizes[bi];
      cols_here.clear();
      auto touch = [&](int J) -> std::vector<double>& {
        if (!present[J]) {
          present[J] = 1;
          cols_here.push_back(J);
          acc[J].assign(static_cast<std::size_t>(h) * s.cols.sizes[J], 0.0);
        }
        return acc[J];
      };
      for (std::int64_t k = m.block_row_ptr[bi]; k < m.block_row_ptr[bi + 1];
           ++k) {
        const int bj = m.block_col_idx[k];
        if (bj < m_blocks) continue;
        const int J = bj - m_blocks;
        std::vector<double>& blk = touch(J);
        std::copy(m.block(k), m.block(k) + blk.size(), blk.begin());
      }
      for (const auto& [K, wblk] : wfull[I]) {
        const int sk = m.rows.sizes[K];
        for (const auto& [J, fptr] : frow[K])
          dense::gemm_sub(wblk.data(), fptr, touch(J).data(), h, sk,
                          s.cols.sizes[J]);
      }
      std::sort(cols_here.begin(), cols_here.end());
      for (int J : cols_here) {
        present[J] = 0;
        s.block_col_idx.push_back(J);
        s.val_ptr.push_back(static_cast<std::int64_t>(s.values.size()));
        s.values.insert(s.values.end(), acc[J].begin(), acc[J].end());
      }
      s.block_row_ptr[I + 1] = static_cast<std::int64_t>(s.block_col_idx.size());
    }
  }

  // Panels kept for the solve, thresholded only now that the Schur
  // complement is assembled.
  auto keep = [&](const double* blk, int h, int w) {
    return dense::frobenius_norm(blk, h, w) /
               (static_cast<double>(h) * static_cast<double>(w)) >=
           drop_tol;
  };
  f.g_panel.rows = sub_layout(m.rows, 0, m_blocks);
  f.g_panel.cols = s.cols;
  f.g_panel.block_row_ptr.assign(m_blocks + 1, 0);
  for (int bi = 0; bi < m_blocks; ++bi) {
    const int h = m.rows.sizes[bi];
    for (const auto& [J, ptr] : frow[bi]) {
      const int w = s.cols.sizes[J];
      if (!keep(ptr, h, w)) continue;
      f.g_panel.block_col_idx.push_back(J);
      f.g_panel.val_ptr.push_back(
          static_cast<std::int64_t>(f.g_panel.values.size()));
      f.g_panel.values.insert(f.g_panel.values.end(), ptr,
                              ptr + static_cast<std::size_t>(h) * w);
    }
    f.g_panel.block_row_ptr[bi + 1] =
        static_cast<std::int64_t>(f.g_panel.block_col_idx.size());
  }
  f.w_panel.rows = s.rows;
  f.w_panel.cols = f.g_panel.rows;
  f.w_panel.block_row_ptr.assign(pc + 1, 0);
  for (int I = 0; I < pc; ++I) {
    const int h = s.rows.sizes[I];
    for (const auto& [K, wblk] : wfull[I]) {
      const int w = m.rows.sizes[K];
      if (!keep(wblk.data(), h, w)) continue;
      f.w_panel.block_col_idx.push_back(K);
      f.w_panel.val_ptr.push_back(
          static_cast<std::int64_t>(f.w_panel.values.size()));
      f.w_panel.values.insert(f.w_panel.values.end(), wblk.begin(), wblk.end());
    }
    f.w_panel.block_row_ptr[I + 1] =
        static_cast<std::int64_t>(f.w_panel.block_col_idx.size());
  }
  return out;
}

namespace {

Permutation expand_block_perm(const Permutation& bp,
                              const BlockLayout& old_layout) {
  const int p = bp.size();
  std::vector<int> new_sizes(p);
  for (int nb = 0; nb < p; ++nb)
    new_sizes[nb] = old_layout.sizes[bp.inverse[nb]];
  BlockLayout nl = BlockLayout::from_sizes(std::move(new_sizes));
  std::vector<int> fwd(old_layout.total());
  for (int b = 0; b < p; ++b) {
    const int nb = bp.forward[b];
    for (int o = 0; o < old_layout.sizes[b]; ++o)
      fwd[old_layout.offsets[b] + o] = nl.offsets[nb] + o;
  }
  return Permutation::from_forward(std::move(fwd));
}

}  // namespace

MultilevelFactor factorize_blocked(VbcsrMatrix m, const FactorParams& params,
                                   const std::vector<char>* protect_blocks) {
  params.validate();
  if (m.rows.n_blocks() != m.cols.n_blocks() ||
      m.rows.total() != m.cols.total())
    throw DimensionError("multilevel factorization requires a square block layout");

  MultilevelFactor out;
  out.n = m.rows.total();

  std::vector<char> mask;
  bool protect_mode = false;
  if (protect_blocks) {
    if (static_cast<int>(protect_blocks->size()) != m.rows.n_blocks())
      throw DimensionError("protect mask size mismatch");
    mask = *protect_blocks;
    protect_mode =
        std::any_of(mask.begin(), mask.end(), [](char c) { return c != 0; });
    out.tracked = true;
    for (int b = 0; b < m.rows.n_blocks(); ++b) {
      if (!mask[b]) continue;
      for (int r = m.rows.offsets[b]; r < m.rows.offsets[b + 1]; ++r)
        out.tracked_pos.push_back(r);
    }
    out.tracked_row_scale.assign(out.tracked_pos.size(), 1.0);
    out.tracked_col_scale.assign(out.tracked_pos.size(), 1.0);
  }

  VbcsrMatrix cur = std::move(m);
  int level = 0;
  for (;;) {
    const int pb = cur.rows.n_blocks();
    if (pb == 0) break;
    // Without protection the recursion has a budget; with protected blocks
    // it runs until only those remain, so the last level lines up with them.
    if (!protect_mode && (level >= params.max_levels ||
                          cur.rows.total() <= params.min_schur_size))
      break;
    QuotientGraph qg = quotient_of_blocks(cur);
    IndependentSetOrdering iso =
        protect_mode ? block_independent_set(qg, mask)
                     : block_independent_set(qg);
    if (iso.independent_blocks == 0) break;

    ScalingPair sc = scale_in_place(cur);
    Permutation rp = expand_block_perm(iso.supernode_perm, cur.rows);
    for (std::size_t k = 0; k < out.tracked_pos.size(); ++k) {
      int& pos = out.tracked_pos[k];
      out.tracked_row_scale[k] *= sc.row_scale[pos];
      out.tracked_col_scale[k] *= sc.col_scale[pos];
      pos = rp.forward[pos] - iso.independent_rows;
      if (pos < 0)
        throw Error("internal: protected row entered the independent set");
    }
    VbcsrMatrix permuted = permute_blocks(cur, iso.supernode_perm);
    LevelResult lr =
        factorize_level(permuted, iso.independent_blocks, params.drop_tol, level);
    lr.factor.scaling = std::move(sc);
    lr.factor.row_perm = std::move(rp);
    lr.factor.block_perm = std::move(iso.supernode_perm);
    cur = std::move(lr.schur);
    if (protect_mode) {
      std::vector<char> next(pb - iso.independent_blocks);
      for (int nb = iso.independent_blocks; nb < pb; ++nb)
        next[nb - iso.independent_blocks] =
            mask[lr.factor.block_perm.inverse[nb]];
      mask = std::move(next);
    }
    out.levels.push_back(std::move(lr.factor));
    ++level;
  }

  out.last_n = cur.rows.total();
  if (out.tracked) out.last_matrix = cur;
  if (out.last_n > 0) {
    if (params.exact_last_level) {
      std::vector<double> dense_last = to_dense(cur);
      try {
        out.last_lu = dense::invert_pivot(dense_last.data(), out.last_n);
      } catch (const SingularPivotError& e) {
        throw SingularPivotError(e.magnitude(), level, -1);
      }
      out.last_exact = true;
      out.nnz_precond +=
          static_cast<std::int64_t>(out.last_n) * out.last_n;
    } else {
      try {
        out.last_ilut = block_ilut(cur, params.drop_tol, params.last_level_fill);
      } catch (const SingularPivotError& e) {
        throw SingularPivotError(e.magnitude(), level, e.block_row());
      }
      out.nnz_precond += out.last_ilut.stored_cells();
    }
  }
  for (const auto& l : out.levels) out.nnz_precond += l.stored_cells();
  return out;
}

void MultilevelFactor::forward_sweep(const double* b,
                                     std::vector<std::vector<double>>& kept,
                                     std::vector<double>& g_last) const {
  kept.assign(levels.size(), {});
  std::vector<double> cur(b, b + n);
  std::vector<double> w;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const LevelFactor& lf = levels[l];
    w.resize(lf.n_rows);
    for (int i = 0; i < lf.n_rows; ++i)
      w[lf.row_perm.forward[i]] = cur[i] * lf.scaling.row_scale[i];
    kept[l].assign(w.begin(), w.begin() + lf.m_rows);
    cur.assign(w.begin() + lf.m_rows, w.end());
    if (!cur.empty() && lf.m_rows > 0)
      spmv_sub(lf.w_panel, kept[l].data(), cur.data());
  }
  g_last = std::move(cur);
}

void MultilevelFactor::last_solve(std::vector<double>& g) const {
  if (static_cast<int>(g.size()) != last_n)
    throw DimensionError("last-level operand has wrong length");
  if (last_n == 0) return;
  if (last_exact)
    last_lu.solve(g.data());
  else
    last_ilut.solve(g.data());
}

void MultilevelFactor::backward_sweep(const std::vector<std::vector<double>>& kept,
                                      std::vector<double> z, double* x) const {
  std::vector<double> y, w;
  for (int l = static_cast<int>(levels.size()) - 1; l >= 0; --l) {
    const LevelFactor& lf = levels[l];
    y = kept[l];
    if (!z.empty() && lf.m_rows > 0) spmv_sub(lf.g_panel, z.data(), y.data());
    for (int bi = 0; bi < lf.m_blocks; ++bi) {
      const int off = lf.layout.offsets[bi];
      const int sz = lf.layout.sizes[bi];
      w.resize(sz);
      std::copy(y.begin() + off, y.begin() + off + sz, w.begin());
      dense::gemv_set(lf.pivot_inv[bi].data(), w.data(), y.data() + off, sz, sz);
    }
    std::vector<double> next(lf.n_rows);
    for (int i = 0; i < lf.n_rows; ++i) {
      const int pi = lf.row_perm.forward[i];
      const double v = pi < lf.m_rows ? y[pi] : z[pi - lf.m_rows];
      next[i] = v * lf.scaling.col_scale[i];
    }
    z = std::move(next);
  }
  std::copy(z.begin(), z.end(), x);
}

void MultilevelFactor::solve(const double* b, double* x) const {
  std::vector<std::vector<double>> kept;
  std::vector<double> g;
  forward_sweep(b, kept, g);
  last_solve(g);
  backward_sweep(kept, std::move(g), x);
}

void VbarmsPreconditioner::apply(const double* r, double* z) const {
  std::vector<double> pr(n), pz(n);
  for (int i = 0; i < n; ++i) pr[row_perm.forward[i]] = r[i];
  ml.solve(pr.data(), pz.data());
  for (int i = 0; i < n; ++i) z[i] = pz[row_perm.forward[i]];
}

double VbarmsPreconditioner::memory_ratio() const {
  return matrix_nnz > 0
             ? static_cast<double>(ml.nnz_precond) / static_cast<double>(matrix_nnz)
             : 0.0;
}

VbarmsPreconditioner vbarms_from_partition(const CsrMatrix& a,
                                           BlockPartition part,
                                           const FactorParams& params) {
  params.validate();
  if (a.n_rows != a.n_cols)
    throw DimensionError("preconditioner requires a square matrix");
  if (part.n != a.n_rows)
    throw DimensionError("partition does not cover the matrix");
  VbarmsPreconditioner p;
  p.n = a.n_rows;
  p.matrix_nnz = a.nnz();
  p.partition = std::move(part);
  p.row_perm = p.partition.induced_permutation();
  CsrMatrix ap = permute(a, p.row_perm, p.row_perm);
  VbcsrMatrix vb = to_vbcsr(ap, permuted_contiguous(p.partition));
  p.ml = factorize_blocked(std::move(vb), params);
  return p;
}

VbarmsPreconditioner vbarms_factorize(const CsrMatrix& a,
                                      const FactorParams& params) {
  params.validate();
  return vbarms_from_partition(a, compress(a, params.compression), params);
}

std::vector<double> vbarms_solve(const VbarmsPreconditioner& m,
                                 std::span<const double> r) {
  if (static_cast<int>(r.size()) != m.n)
    throw DimensionError("right-hand side has wrong length");
  std::vector<double> z(m.n);
  m.apply(r.data(), z.data());
  return z;
}

}  // namespace vbarms
