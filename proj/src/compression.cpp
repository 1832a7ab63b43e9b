#include "vbarms/compression.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

namespace vbarms {

std::string to_string(CompressionMethod m) {
  switch (m) {
    case CompressionMethod::checksum: return "checksum";
    case CompressionMethod::angle: return "angle";
    case CompressionMethod::graph: return "graph";
  }
  return "?";
}

CompressionMethod compression_method_from_string(const std::string& s) {
  if (s == "checksum") return CompressionMethod::checksum;
  if (s == "angle") return CompressionMethod::angle;
  if (s == "graph") return CompressionMethod::graph;
  throw Error("unknown compression method '" + s + "'");
}

void CompressionParams::validate() const {
  if (method == CompressionMethod::angle && !(tau > 0.0 && tau <= 1.0))
    throw Error("angle threshold tau must lie in (0, 1]");
  if (method == CompressionMethod::graph && !(mu > 0.0 && mu <= 1.0))
    throw Error("density floor mu must lie in (0, 1]");
}

namespace {

// Densifies arbitrary labels to ids ordered by first appearance.
std::vector<int> densify_labels(const std::vector<int>& labels, int max_label) {
  std::vector<int> remap(max_label, -1);
  std::vector<int> out(labels.size());
  int next = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int& id = remap[labels[i]];
    if (id < 0) id = next++;
    out[i] = id;
  }
  return out;
}

}  // namespace

BlockPartition exact_blocking(const AdjacencyGraph& g) {
  const int n = g.n;
  const std::vector<std::uint64_t> keys = checksum_keys(g);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int u, int w) {
    return keys[u] != keys[w] ? keys[u] < keys[w] : u < w;
  });
  std::vector<int> block_of(n, -1);
  int next_id = 0;
  std::size_t lo = 0;
  while (lo < order.size()) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && keys[order[hi]] == keys[order[lo]]) ++hi;
    for (std::size_t i = lo; i < hi; ++i) {
      int u = order[i];
      if (block_of[u] >= 0) continue;
      int id = next_id++;
      block_of[u] = id;
      auto nu = g.neighbors(u);
      for (std::size_t j = i + 1; j < hi; ++j) {
        int w = order[j];
        if (block_of[w] >= 0) continue;
        auto nw = g.neighbors(w);
        if (nu.size() == nw.size() &&
            std::equal(nu.begin(), nu.end(), nw.begin()))
          block_of[w] = id;
      }
    }
    lo = hi;
  }
  // Group ids follow checksum-key order; renumber by first appearance so the
  // labeling is canonical across methods.
  return make_partition(n, densify_labels(block_of, next_id));
}

namespace {

std::int64_t intersection_size(std::span<const int> a, std::span<const int> b) {
  std::int64_t count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (a[i] > b[j]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

}  // namespace

BlockPartition angle_blocking(const CsrMatrix& a, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw Error("angle threshold tau must lie in (0, 1]");
  const AdjacencyGraph g = symmetrized_pattern(a);
  const BlockPartition exact = exact_blocking(g);
  const int n = g.n;
  const int p = exact.n_blocks();

  // Groups in layout order: ascending lowest member. The representative is
  // fixed at the group's lowest member.
  std::vector<int> rep(p), count(p);
  std::vector<char> alive(p, 1);
  for (int r = 0; r < p; ++r) {
    int b = exact.block_order[r];
    rep[r] = exact.members(b)[0];
    count[r] = exact.block_sizes[b];
  }
  std::vector<int> group_of(n);
  {
    std::vector<int> rank_of(p);
    for (int r = 0; r < p; ++r) rank_of[exact.block_order[r]] = r;
    for (int i = 0; i < n; ++i) group_of[i] = rank_of[exact.block_of[i]];
  }
  std::vector<char> is_rep(n, 0);
  for (int r = 0; r < p; ++r) is_rep[rep[r]] = 1;

  std::vector<int> gstamp(p, -1);
  std::vector<int> cand;
  const double tau2 = tau * tau;
  for (int r = 0; r < p; ++r) {
    if (!alive[r] || count[r] != 1) continue;
    const int i = rep[r];
    auto pi = g.neighbors(i);
    const double di = static_cast<double>(pi.size());
    // Groups with a nonzero pattern overlap have their representative within
    // distance two of i.
    cand.clear();
    for (int w : pi) {
      for (int x : g.neighbors(w)) {
        if (!is_rep[x]) continue;
        int gr = group_of[x];
        if (gr == r || !alive[gr] || gstamp[gr] == r) continue;
        gstamp[gr] = r;
        cand.push_back(gr);
      }
    }
    std::sort(cand.begin(), cand.end());
    for (int gr : cand) {
      auto pr = g.neighbors(rep[gr]);
      const double dr = static_cast<double>(pr.size());
      // inter <= min(di, dr), so this candidate cannot pass when
      // min < tau^2 * max.
      if (std::min(di, dr) < tau2 * std::max(di, dr)) continue;
      const double inter = static_cast<double>(intersection_size(pi, pr));
      if (inter * inter >= tau2 * di * dr) {
        group_of[i] = gr;
        ++count[gr];
        alive[r] = 0;
        is_rep[i] = 0;
        break;
      }
    }
  }
  return make_partition(n, densify_labels(group_of, p));
}

GraphBlockingResult graph_blocking_detailed(const CsrMatrix& a, double mu) {
  if (!(mu > 0.0 && mu <= 1.0))
    throw Error("density floor mu must lie in (0, 1]");
  const AdjacencyGraph g = symmetrized_pattern(a);
  const BlockPartition exact = exact_blocking(g);
  const QuotientGraph q = build_quotient_graph(g, exact);
  const int p = q.n_supernodes();
  const std::int64_t pattern_nnz = static_cast<std::int64_t>(g.nbr.size());

  std::vector<std::int64_t> size(p);
  for (int b = 0; b < p; ++b) size[b] = exact.block_sizes[b];
  std::vector<std::vector<int>> nbr(p);  // sorted, self excluded
  for (int b = 0; b < p; ++b) {
    nbr[b].reserve(q.adjacency[b].size());
    for (int v : q.adjacency[b])
      if (v != b) nbr[b].push_back(v);
  }

  // covered = sum over ordered supernode pairs (S, V), adjacent or equal, of
  // |S| * |V|: the cells of every block pair holding a pattern entry.
  std::int64_t covered = 0;
  for (int b = 0; b < p; ++b) {
    std::int64_t s = size[b];
    for (int v : nbr[b]) s += size[v];
    covered += size[b] * s;
  }

  std::vector<char> alive(p, 1);
  std::vector<int> parent(p);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> queued(p, -1);
  std::priority_queue<int, std::vector<int>, std::greater<int>> heap;
  std::vector<int> merged_nbr;

  auto sum_sizes_except = [&](const std::vector<int>& list, int skip) {
    std::int64_t s = 0;
    for (int z : list)
      if (z != skip) s += size[z];
    return s;
  };

  for (int x = 0; x < p; ++x) {
    if (!alive[x]) continue;
    heap = {};
    for (int y : nbr[x]) {
      queued[y] = x;
      heap.push(y);
    }
    while (!heap.empty()) {
      int y = heap.top();
      heap.pop();
      if (!alive[y] || y == x) continue;
      // Exact covered-cell delta of merging y into x. Self terms cancel:
      // (|x| + |y|)^2 = |x|^2 + |y|^2 + 2|x||y|, and the x~y pair edge
      // accounts for the cross term.
      const std::int64_t sa = sum_sizes_except(nbr[x], y);
      const std::int64_t sb = sum_sizes_except(nbr[y], x);
      std::int64_t sab = 0;
      {
        std::size_t i = 0, j = 0;
        const std::vector<int>& na = nbr[x];
        const std::vector<int>& nb = nbr[y];
        while (i < na.size() && j < nb.size()) {
          if (na[i] < nb[j]) {
            ++i;
          } else if (na[i] > nb[j]) {
            ++j;
          } else {
            if (na[i] != x && na[i] != y) sab += size[na[i]];
            ++i;
            ++j;
          }
        }
      }
      const std::int64_t w = size[x] + size[y];
      const std::int64_t next_covered =
          covered + 2 * (w * (sa + sb - sab) - size[x] * sa - size[y] * sb);
      if (static_cast<double>(pattern_nnz) >=
          mu * static_cast<double>(next_covered)) {
        covered = next_covered;
        size[x] = w;
        alive[y] = 0;
        parent[y] = x;
        // Splice y's neighborhood into x and repoint third parties.
        merged_nbr.clear();
        std::set_union(nbr[x].begin(), nbr[x].end(), nbr[y].begin(),
                       nbr[y].end(), std::back_inserter(merged_nbr));
        std::erase(merged_nbr, x);
        std::erase(merged_nbr, y);
        for (int z : nbr[y]) {
          if (z == x) continue;
          auto it = std::lower_bound(nbr[z].begin(), nbr[z].end(), y);
          if (it != nbr[z].end() && *it == y) nbr[z].erase(it);
          it = std::lower_bound(nbr[z].begin(), nbr[z].end(), x);
          if (it == nbr[z].end() || *it != x) nbr[z].insert(it, x);
          if (queued[z] != x && alive[z]) {
            queued[z] = x;
            heap.push(z);
          }
        }
        nbr[x] = merged_nbr;
        nbr[y].clear();
      }
    }
  }

  auto find = [&](int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::vector<int> labels(g.n);
  for (int i = 0; i < g.n; ++i) labels[i] = find(exact.block_of[i]);

  GraphBlockingResult res;
  res.partition = make_partition(g.n, densify_labels(labels, p));
  res.covered_cells = covered;
  res.pattern_nnz = pattern_nnz;
  res.final_av_bd =
      covered > 0
          ? static_cast<double>(pattern_nnz) / static_cast<double>(covered)
          : 0.0;
  return res;
}

BlockPartition graph_blocking(const CsrMatrix& a, double mu) {
  return graph_blocking_detailed(a, mu).partition;
}

double pattern_av_bd(const AdjacencyGraph& g, const BlockPartition& part) {
  const QuotientGraph q = build_quotient_graph(g, part);
  std::int64_t covered = 0;
  for (int b = 0; b < q.n_supernodes(); ++b) {
    std::int64_t s = 0;
    for (int v : q.adjacency[b])
      s += static_cast<std::int64_t>(q.supernodes[v].size());
    covered += static_cast<std::int64_t>(q.supernodes[b].size()) * s;
  }
  if (covered == 0) return 0.0;
  return static_cast<double>(g.nbr.size()) / static_cast<double>(covered);
}

BlockPartition compress(const CsrMatrix& a, const CompressionParams& params) {
  params.validate();
  switch (params.method) {
    case CompressionMethod::checksum:
      return exact_blocking(symmetrized_pattern(a));
    case CompressionMethod::angle:
      return angle_blocking(a, params.tau);
    case CompressionMethod::graph:
      return graph_blocking(a, params.mu);
  }
  throw Error("unreachable compression method");
}

}  // namespace vbarms
