#include "vbarms/dd.hpp"

#include <algorithm>
#include <exception>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <utility>

namespace vbarms {

void DomainMap::validate(const QuotientGraph& q) const {
  if (static_cast<int>(owner.size()) != q.n_supernodes())
    throw DimensionError("domain map does not cover the supernodes");
  if (n_domains < 1) throw Error("domain count must be at least 1");
  std::vector<std::int64_t> count(n_domains, 0);
  for (int s = 0; s < q.n_supernodes(); ++s) {
    if (owner[s] < 0 || owner[s] >= n_domains)
      throw DimensionError("supernode " + std::to_string(s) +
                           " has out-of-range owner " + std::to_string(owner[s]));
    ++count[owner[s]];
  }
  for (int d = 0; d < n_domains; ++d)
    if (count[d] == 0)
      throw Error("domain " + std::to_string(d) + " owns no supernodes");
}

DomainMap domain_map_from_owner(std::vector<int> owner, const QuotientGraph& q) {
  DomainMap map;
  map.owner = std::move(owner);
  int p = 0;
  for (int d : map.owner) p = std::max(p, d + 1);
  map.n_domains = p;
  map.validate(q);
  map.domain_rows.resize(p);
  for (int s = 0; s < q.n_supernodes(); ++s) {
    auto& rows = map.domain_rows[map.owner[s]];
    rows.insert(rows.end(), q.supernodes[s].begin(), q.supernodes[s].end());
  }
  return map;
}

DomainMap read_domain_map(std::istream& is, const QuotientGraph& q) {
  std::vector<int> owner;
  owner.reserve(q.n_supernodes());
  long v;
  while (static_cast<int>(owner.size()) < q.n_supernodes() && is >> v)
    owner.push_back(static_cast<int>(v));
  if (static_cast<int>(owner.size()) != q.n_supernodes())
    throw ParseError("domain file ended after " + std::to_string(owner.size()) +
                     " of " + std::to_string(q.n_supernodes()) + " supernodes");
  return domain_map_from_owner(std::move(owner), q);
}

namespace {

std::vector<int> bfs_distance(const QuotientGraph& q,
                              const std::vector<int>& sources) {
  std::vector<int> dist(q.n_supernodes(), -1);
  std::vector<int> queue;
  queue.reserve(q.n_supernodes());
  for (int s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int u = queue[head];
    for (int v : q.adjacency[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

DomainMap partition_quotient_graph(const QuotientGraph& q, int p) {
  const int ns = q.n_supernodes();
  if (p < 1 || p > ns)
    throw Error("domain count " + std::to_string(p) +
                " out of range (1.." + std::to_string(ns) + ")");

  // Farthest-point seeding: vertices no BFS wave reaches count as farthest.
  std::vector<int> seeds{0};
  for (int k = 1; k < p; ++k) {
    std::vector<int> dist = bfs_distance(q, seeds);
    int best = -1;
    for (int s = 0; s < ns; ++s) {
      if (dist[s] == 0) continue;
      if (best < 0) {
        best = s;
        continue;
      }
      const bool s_inf = dist[s] < 0, b_inf = dist[best] < 0;
      if (s_inf != b_inf) {
        if (s_inf) best = s;
      } else if (!s_inf && dist[s] > dist[best]) {
        best = s;
      }
    }
    seeds.push_back(best);
  }

  // Balanced growth: the domain with the fewest rows claims the next
  // supernode from its frontier.
  std::vector<int> owner(ns, -1);
  std::vector<std::int64_t> rows(p, 0);
  std::vector<std::vector<int>> queue(p);
  std::vector<std::size_t> head(p, 0);
  for (int d = 0; d < p; ++d) queue[d].push_back(seeds[d]);
  int claimed = 0;
  int cursor = 0;  // scan position for stranded supernodes
  while (claimed < ns) {
    int best = -1;
    for (int d = 0; d < p; ++d) {
      while (head[d] < queue[d].size() && owner[queue[d][head[d]]] >= 0)
        ++head[d];
      if (head[d] == queue[d].size()) continue;
      if (best < 0 || rows[d] < rows[best]) best = d;
    }
    if (best < 0) {
      // Disconnected remainder: hand the smallest unclaimed supernode to the
      // least-loaded domain and grow from there.
      while (owner[cursor] >= 0) ++cursor;
      int d = 0;
      for (int t = 1; t < p; ++t)
        if (rows[t] < rows[d]) d = t;
      queue[d].push_back(cursor);
      continue;
    }
    const int s = queue[best][head[best]++];
    owner[s] = best;
    rows[best] += static_cast<std::int64_t>(q.supernodes[s].size());
    ++claimed;
    for (int v : q.adjacency[s])
      if (owner[v] < 0) queue[best].push_back(v);
  }
  return domain_map_from_owner(std::move(owner), q);
}

VbcsrMatrix LocalSystem::b_panel() const {
  return extract_panel(matrix, 0, n_interior_blocks, 0, n_interior_blocks);
}
VbcsrMatrix LocalSystem::f_panel() const {
  return extract_panel(matrix, 0, n_interior_blocks, n_interior_blocks,
                       n_owned_blocks);
}
VbcsrMatrix LocalSystem::e_panel() const {
  return extract_panel(matrix, n_interior_blocks, n_owned_blocks, 0,
                       n_interior_blocks);
}
VbcsrMatrix LocalSystem::c_panel() const {
  return extract_panel(matrix, n_interior_blocks, n_owned_blocks,
                       n_interior_blocks, n_owned_blocks);
}

std::vector<LocalSystem> build_local_systems(const CsrMatrix& a,
                                             const BlockPartition& part,
                                             const DomainMap& map, int overlap) {
  if (a.n_rows != a.n_cols)
    throw DimensionError("local systems require a square matrix");
  if (part.n != a.n_rows)
    throw DimensionError("partition does not cover the matrix");
  if (overlap < 0) throw Error("overlap must be nonnegative");
  const int ns = part.n_blocks();
  if (static_cast<int>(map.owner.size()) != ns)
    throw DimensionError("domain map does not cover the supernodes");
  const int p = map.n_domains;
  const int n = a.n_rows;

  const AdjacencyGraph g = symmetrized_pattern(a);

  // A supernode is interface when the symmetrized pattern couples any of its
  // rows to a supernode owned by another domain.
  std::vector<char> is_interface(ns, 0);
  for (int s = 0; s < ns; ++s) {
    const int own = map.owner[s];
    for (int u : part.members(s)) {
      for (int w : g.neighbors(u)) {
        if (map.owner[part.block_of[w]] != own) {
          is_interface[s] = 1;
          break;
        }
      }
      if (is_interface[s]) break;
    }
  }

  QuotientGraph qg;
  if (overlap > 0) qg = build_quotient_graph(g, part);

  std::vector<std::vector<int>> owned(p);
  for (int s = 0; s < ns; ++s) owned[map.owner[s]].push_back(s);

  std::vector<LocalSystem> locals(p);
  std::vector<int> col_g2l(n, -1);
  std::vector<int> if_pos(n, -1);
  std::vector<int> sup_stamp(ns, -1);

  for (int d = 0; d < p; ++d) {
    LocalSystem& ls = locals[d];
    ls.domain = d;
    for (int s : owned[d])
      if (!is_interface[s]) ls.supernodes.push_back(s);
    ls.n_interior_blocks = static_cast<int>(ls.supernodes.size());
    for (int s : owned[d])
      if (is_interface[s]) ls.supernodes.push_back(s);
    ls.n_owned_blocks = static_cast<int>(ls.supernodes.size());

    // Overlap rings via quotient adjacency.
    if (overlap > 0) {
      for (int s : owned[d]) sup_stamp[s] = d;
      std::vector<int> frontier(owned[d]);
      for (int ring = 0; ring < overlap; ++ring) {
        std::vector<int> next;
        for (int s : frontier) {
          for (int v : qg.adjacency[s]) {
            if (sup_stamp[v] != d) {
              sup_stamp[v] = d;
              next.push_back(v);
            }
          }
        }
        std::sort(next.begin(), next.end());
        ls.supernodes.insert(ls.supernodes.end(), next.begin(), next.end());
        frontier = std::move(next);
      }
    }

    std::vector<int> sizes;
    sizes.reserve(ls.supernodes.size());
    for (std::size_t t = 0; t < ls.supernodes.size(); ++t) {
      const int s = ls.supernodes[t];
      auto mem = part.members(s);
      sizes.push_back(static_cast<int>(mem.size()));
      for (int r : mem) {
        if (static_cast<int>(t) < ls.n_interior_blocks)
          ls.interior_rows.push_back(r);
        else if (static_cast<int>(t) < ls.n_owned_blocks) {
          if_pos[r] = static_cast<int>(ls.interface_rows.size());
          ls.interface_rows.push_back(r);
        }
        ls.rows.push_back(r);
      }
    }
    ls.n_interior_rows = static_cast<int>(ls.interior_rows.size());
    ls.n_owned_rows = ls.n_interior_rows +
                      static_cast<int>(ls.interface_rows.size());

    const int nloc = static_cast<int>(ls.rows.size());
    for (int k = 0; k < nloc; ++k) col_g2l[ls.rows[k]] = k;
    std::vector<Triplet> entries;
    for (int k = 0; k < nloc; ++k) {
      const int r = ls.rows[k];
      auto cols = a.row_cols(r);
      auto vals = a.row_vals(r);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        const int lc = col_g2l[cols[e]];
        if (lc >= 0) entries.push_back({k, lc, vals[e]});
      }
    }
    ls.nnz = static_cast<std::int64_t>(entries.size());
    CsrMatrix lm = csr_from_triplets(nloc, nloc, std::move(entries));
    ls.matrix = to_vbcsr(lm, contiguous_partition(sizes));
    for (int k = 0; k < nloc; ++k) col_g2l[ls.rows[k]] = -1;
  }

  // Zero-overlap cross couplings, indexed by interface positions.
  std::map<std::pair<int, int>, std::vector<Triplet>> buckets;
  for (int r = 0; r < n; ++r) {
    const int i = map.owner[part.block_of[r]];
    auto cols = a.row_cols(r);
    auto vals = a.row_vals(r);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const int c = cols[e];
      const int j = map.owner[part.block_of[c]];
      if (i == j) continue;
      if (if_pos[r] < 0 || if_pos[c] < 0)
        throw Error("internal: cross-domain entry outside the interface");
      buckets[{i, j}].push_back({if_pos[r], if_pos[c], vals[e]});
    }
  }
  for (auto& [key, trips] : buckets) {
    const auto [i, j] = key;
    LocalSystem::Coupling cp;
    cp.neighbor = j;
    cp.matrix = csr_from_triplets(
        static_cast<int>(locals[i].interface_rows.size()),
        static_cast<int>(locals[j].interface_rows.size()), std::move(trips));
    locals[i].couplings.push_back(std::move(cp));
  }
  return locals;
}

std::string to_string(DdKind k) {
  switch (k) {
    case DdKind::bj: return "bj";
    case DdKind::ras: return "ras";
    case DdKind::schur: return "schur";
  }
  return "?";
}

DdKind dd_kind_from_string(const std::string& s) {
  if (s == "bj") return DdKind::bj;
  if (s == "ras") return DdKind::ras;
  if (s == "schur") return DdKind::schur;
  throw Error("unknown preconditioner kind '" + s + "'");
}

namespace {

// Runs fn(d) for each domain, possibly on a small thread pool. Domain work
// must write only domain-private state (or disjoint slices); the first
// captured exception, by domain id, is rethrown after the join.
void run_per_domain(int p, int threads, const std::function<void(int)>& fn) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  const int t_count = threads <= 0 ? std::min(p, hw) : std::min(threads, p);
  if (t_count <= 1 || p <= 1) {
    for (int d = 0; d < p; ++d) fn(d);
    return;
  }
  std::vector<std::exception_ptr> errors(p);
  std::vector<std::thread> pool;
  pool.reserve(t_count);
  for (int t = 0; t < t_count; ++t) {
    pool.emplace_back([&, t]() {
      for (int d = t; d < p; d += t_count) {
        try {
          fn(d);
        } catch (...) {
          errors[d] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int d = 0; d < p; ++d)
    if (errors[d]) std::rethrow_exception(errors[d]);
}

}  // namespace

GlobalPreconditioner build_global_preconditioner(DdKind kind,
                                                 std::vector<LocalSystem> locals,
                                                 const DdParams& params) {
  if (kind == DdKind::schur)
    return build_schur_preconditioner(std::move(locals), params);
  params.factor.validate();
  GlobalPreconditioner gp;
  gp.kind = kind;
  gp.params = params;
  const int p = static_cast<int>(locals.size());
  if (p == 0) throw Error("no local systems given");
  gp.domains.resize(p);
  for (int d = 0; d < p; ++d) {
    gp.domains[d].sys = std::move(locals[d]);
    const LocalSystem& sys = gp.domains[d].sys;
    if (kind == DdKind::bj &&
        static_cast<int>(sys.rows.size()) != sys.n_owned_rows)
      throw Error("block-Jacobi expects zero-overlap local systems");
    gp.n += sys.n_owned_rows;
    gp.local_nnz_total += sys.nnz;
  }
  run_per_domain(p, params.threads, [&](int d) {
    try {
      gp.domains[d].factor =
          factorize_blocked(gp.domains[d].sys.matrix, params.factor);
    } catch (const Error& e) {
      throw Error("domain " + std::to_string(d) + ": " + e.what());
    }
  });
  gp.interface_offset.assign(p + 1, 0);
  for (int d = 0; d < p; ++d)
    gp.interface_offset[d + 1] =
        gp.interface_offset[d] +
        static_cast<int>(gp.domains[d].sys.interface_rows.size());
  return gp;
}

GlobalPreconditioner build_schur_preconditioner(std::vector<LocalSystem> locals,
                                                const DdParams& params) {
  params.factor.validate();
  if (params.inner_iters < 1) throw Error("inner iteration budget must be >= 1");
  if (!(params.inner_tol > 0.0)) throw Error("inner tolerance must be positive");
  GlobalPreconditioner gp;
  gp.kind = DdKind::schur;
  gp.params = params;
  const int p = static_cast<int>(locals.size());
  if (p == 0) throw Error("no local systems given");
  gp.domains.resize(p);
  for (int d = 0; d < p; ++d) {
    gp.domains[d].sys = std::move(locals[d]);
    const LocalSystem& sys = gp.domains[d].sys;
    if (static_cast<int>(sys.rows.size()) != sys.n_owned_rows)
      throw Error("Schur preconditioner requires zero-overlap local systems");
    gp.n += sys.n_owned_rows;
    gp.local_nnz_total += sys.nnz;
  }
  run_per_domain(p, params.threads, [&](int d) {
    auto& dom = gp.domains[d];
    const int nb = dom.sys.matrix.rows.n_blocks();
    std::vector<char> protect(nb, 0);
    for (int b = dom.sys.n_interior_blocks; b < dom.sys.n_owned_blocks; ++b)
      protect[b] = 1;
    try {
      dom.factor = factorize_blocked(dom.sys.matrix, params.factor, &protect);
    } catch (const Error& e) {
      throw Error("domain " + std::to_string(d) + ": " + e.what());
    }
    dom.in_global = !dom.sys.interface_rows.empty();
    if (dom.in_global &&
        dom.factor.last_n !=
            static_cast<int>(dom.sys.interface_rows.size()))
      throw Error("internal: last level does not match the interface set");
  });
  gp.interface_offset.assign(p + 1, 0);
  for (int d = 0; d < p; ++d)
    gp.interface_offset[d + 1] =
        gp.interface_offset[d] +
        static_cast<int>(gp.domains[d].sys.interface_rows.size());
  return gp;
}

namespace {

using Domain = GlobalPreconditioner::Domain;

void local_solve_apply(const GlobalPreconditioner& gp, const double* r,
                       double* z) {
  run_per_domain(static_cast<int>(gp.domains.size()), gp.params.threads,
                 [&](int d) {
                   const Domain& dom = gp.domains[d];
                   const int nl = static_cast<int>(dom.sys.rows.size());
                   std::vector<double> rl(nl), zl(nl);
                   for (int k = 0; k < nl; ++k) rl[k] = r[dom.sys.rows[k]];
                   dom.factor.solve(rl.data(), zl.data());
                   // Restricted write-back: only rows this domain owns.
                   for (int k = 0; k < dom.sys.n_owned_rows; ++k)
                     z[dom.sys.rows[k]] = zl[k];
                 });
}

// Scaled interface operator: the assembled last-level matrices on the block
// diagonal plus the cross couplings carried into the same scaled coordinates.
void schur_operator(const GlobalPreconditioner& gp, const double* x, double* y) {
  const int gdim = gp.interface_offset.back();
  std::fill(y, y + gdim, 0.0);
  for (std::size_t d = 0; d < gp.domains.size(); ++d) {
    const Domain& dom = gp.domains[d];
    if (!dom.in_global) continue;
    const int off = gp.interface_offset[d];
    spmv(dom.factor.last_matrix, x + off, y + off);
    for (const auto& cp : dom.sys.couplings) {
      const Domain& nb = gp.domains[cp.neighbor];
      const int noff = gp.interface_offset[cp.neighbor];
      const CsrMatrix& e = cp.matrix;
      for (int k = 0; k < e.n_rows; ++k) {
        double s = 0.0;
        for (std::int64_t t = e.row_ptr[k]; t < e.row_ptr[k + 1]; ++t) {
          const int c = e.col_idx[t];
          s += e.values[t] * nb.factor.tracked_col_scale[c] *
               x[noff + nb.factor.tracked_pos[c]];
        }
        y[off + dom.factor.tracked_pos[k]] +=
            dom.factor.tracked_row_scale[k] * s;
      }
    }
  }
}

void schur_apply_impl(const GlobalPreconditioner& gp, const double* r,
                      double* z) {
  const int p = static_cast<int>(gp.domains.size());
  struct Scratch {
    std::vector<std::vector<double>> kept;
    std::vector<double> g;
  };
  std::vector<Scratch> sc(p);
  run_per_domain(p, gp.params.threads, [&](int d) {
    const Domain& dom = gp.domains[d];
    const int nl = static_cast<int>(dom.sys.rows.size());
    std::vector<double> rl(nl);
    for (int k = 0; k < nl; ++k) rl[k] = r[dom.sys.rows[k]];
    dom.factor.forward_sweep(rl.data(), sc[d].kept, sc[d].g);
    // Domains with no interface solve their bottom level on the spot.
    if (!dom.in_global) dom.factor.last_solve(sc[d].g);
  });

  const int gdim = gp.interface_offset.back();
  if (gdim > 0) {
    std::vector<double> rhs(gdim), zg(gdim, 0.0);
    for (int d = 0; d < p; ++d) {
      if (!gp.domains[d].in_global) continue;
      std::copy(sc[d].g.begin(), sc[d].g.end(),
                rhs.begin() + gp.interface_offset[d]);
    }
    LinearOperator op = [&gp](const double* x, double* y) {
      schur_operator(gp, x, y);
    };
    LinearOperator prec = [&gp](const double* x, double* y) {
      for (std::size_t d = 0; d < gp.domains.size(); ++d) {
        const Domain& dom = gp.domains[d];
        if (!dom.in_global) continue;
        const int off = gp.interface_offset[d];
        const int len = gp.interface_offset[d + 1] - off;
        std::vector<double> t(x + off, x + off + len);
        dom.factor.last_solve(t);
        std::copy(t.begin(), t.end(), y + off);
      }
    };
    KrylovParams kp;
    kp.tol = gp.params.inner_tol;
    kp.max_iters = gp.params.inner_iters;
    kp.restart_dim = gp.params.inner_iters;
    fgmres(gdim, op, prec, rhs, zg, kp);
    for (int d = 0; d < p; ++d) {
      if (!gp.domains[d].in_global) continue;
      const int off = gp.interface_offset[d];
      sc[d].g.assign(zg.begin() + off,
                     zg.begin() + gp.interface_offset[d + 1]);
    }
  }

  run_per_domain(p, gp.params.threads, [&](int d) {
    const Domain& dom = gp.domains[d];
    const int nl = static_cast<int>(dom.sys.rows.size());
    std::vector<double> zl(nl);
    dom.factor.backward_sweep(sc[d].kept, std::move(sc[d].g), zl.data());
    for (int k = 0; k < dom.sys.n_owned_rows; ++k)
      z[dom.sys.rows[k]] = zl[k];
  });
}

}  // namespace

void GlobalPreconditioner::apply(const double* r, double* z) const {
  if (kind == DdKind::schur)
    schur_apply_impl(*this, r, z);
  else
    local_solve_apply(*this, r, z);
}

double GlobalPreconditioner::memory_ratio() const {
  return local_nnz_total > 0
             ? static_cast<double>(precond_cells()) /
                   static_cast<double>(local_nnz_total)
             : 0.0;
}

std::int64_t GlobalPreconditioner::precond_cells() const {
  std::int64_t cells = 0;
  for (const auto& dom : domains) cells += dom.factor.nnz_precond;
  return cells;
}

std::vector<int> GlobalPreconditioner::interface_rows() const {
  std::vector<int> rows;
  for (const auto& dom : domains)
    rows.insert(rows.end(), dom.sys.interface_rows.begin(),
                dom.sys.interface_rows.end());
  return rows;
}

void GlobalPreconditioner::apply_global_schur(const double* y, double* sy) const {
  if (kind != DdKind::schur)
    throw Error("global interface operator requires the Schur kind");
  const int gdim = interface_offset.back();
  std::vector<double> xs(gdim, 0.0), ys(gdim);
  for (std::size_t d = 0; d < domains.size(); ++d) {
    const Domain& dom = domains[d];
    const int off = interface_offset[d];
    const int len = interface_offset[d + 1] - off;
    for (int k = 0; k < len; ++k)
      xs[off + dom.factor.tracked_pos[k]] =
          y[off + k] / dom.factor.tracked_col_scale[k];
  }
  schur_operator(*this, xs.data(), ys.data());
  for (std::size_t d = 0; d < domains.size(); ++d) {
    const Domain& dom = domains[d];
    const int off = interface_offset[d];
    const int len = interface_offset[d + 1] - off;
    for (int k = 0; k < len; ++k)
      sy[off + k] = ys[off + dom.factor.tracked_pos[k]] /
                    dom.factor.tracked_row_scale[k];
  }
}

namespace {

std::vector<double> checked_apply(const GlobalPreconditioner& gp,
                                  std::span<const double> r, DdKind expect) {
  if (gp.kind != expect)
    throw Error("preconditioner kind is " + to_string(gp.kind) +
                ", expected " + to_string(expect));
  if (static_cast<int>(r.size()) != gp.n)
    throw DimensionError("operand has wrong length");
  std::vector<double> z(gp.n);
  gp.apply(r.data(), z.data());
  return z;
}

}  // namespace

std::vector<double> bj_apply(const GlobalPreconditioner& gp,
                             std::span<const double> r) {
  return checked_apply(gp, r, DdKind::bj);
}

std::vector<double> ras_apply(const GlobalPreconditioner& gp,
                              std::span<const double> r) {
  return checked_apply(gp, r, DdKind::ras);
}

std::vector<double> schur_apply(const GlobalPreconditioner& gp,
                                std::span<const double> r) {
  return checked_apply(gp, r, DdKind::schur);
}

}  // namespace vbarms
