#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vbarms/csr.hpp"
#include "vbarms/krylov.hpp"
#include "vbarms/partition.hpp"
#include "vbarms/quotient.hpp"
#include "vbarms/vbarms.hpp"
#include "vbarms/vbcsr.hpp"

namespace vbarms {

// Assignment of supernodes to domains.
struct DomainMap {
  int n_domains = 0;
  std::vector<int> owner;                       // per supernode
  std::vector<std::vector<int>> domain_rows;    // global rows per domain

  void validate(const QuotientGraph& q) const;
};

// Greedy BFS growth from p seeds chosen farthest-first (ties by smallest
// id). Domains grow one supernode at a time, always the domain with the
// fewest rows so far, so sizes stay balanced. Deterministic.
DomainMap partition_quotient_graph(const QuotientGraph& q, int p);

// One domain id per supernode, one per line. Ids must be dense and every
// domain nonempty.
DomainMap read_domain_map(std::istream& is, const QuotientGraph& q);
DomainMap domain_map_from_owner(std::vector<int> owner, const QuotientGraph& q);

// Everything a domain needs to solve locally. Local rows are ordered:
// owned interior supernodes, owned interface supernodes, then overlap rings
// (each group by ascending supernode id). A supernode is interface when the
// symmetrized pattern couples it to a supernode owned elsewhere.
struct LocalSystem {
  int domain = 0;
  std::vector<int> supernodes;    // global supernode ids in local block order
  int n_interior_blocks = 0;
  int n_owned_blocks = 0;         // interior + interface
  std::vector<int> rows;          // global row per local row
  int n_interior_rows = 0;
  int n_owned_rows = 0;
  std::vector<int> interior_rows;   // global ids, ascending supernode order
  std::vector<int> interface_rows;  // global ids, local interface order
  VbcsrMatrix matrix;             // local matrix over all local rows
  std::int64_t nnz = 0;           // pointwise entries extracted into `matrix`

  // Cross-domain coupling on the zero-overlap interface lists: entry (k, c)
  // ties this domain's k-th interface row to neighbor j's c-th interface
  // variable. Present regardless of overlap; ascending neighbor id.
  struct Coupling {
    int neighbor = 0;
    CsrMatrix matrix;
  };
  std::vector<Coupling> couplings;

  // Panels of the owned part: [B F; E C] with B over interior blocks.
  VbcsrMatrix b_panel() const;
  VbcsrMatrix f_panel() const;
  VbcsrMatrix e_panel() const;
  VbcsrMatrix c_panel() const;
};

// Extracts the per-domain systems. With overlap > 0 the owned supernode set
// is expanded by quotient-graph adjacency that many times; overlap rows are
// duplicated across domains and columns leaving the expanded set are
// dropped from the local matrix. Interior/interface classification and the
// couplings always refer to the zero-overlap ownership.
std::vector<LocalSystem> build_local_systems(const CsrMatrix& a,
                                             const BlockPartition& part,
                                             const DomainMap& map, int overlap);

enum class DdKind { bj, ras, schur };

std::string to_string(DdKind k);
DdKind dd_kind_from_string(const std::string& s);

struct DdParams {
  int overlap = 0;        // RAS only
  int inner_iters = 5;    // Schur interface solve budget
  double inner_tol = 1e-2;
  int threads = 0;        // 0 = one per domain, capped by the hardware
  FactorParams factor{};
};

// A domain-decomposed preconditioner over the original row numbering.
// Immutable after construction; apply() is safe to call concurrently.
struct GlobalPreconditioner {
  DdKind kind = DdKind::bj;
  int n = 0;
  DdParams params;

  struct Domain {
    LocalSystem sys;
    MultilevelFactor factor;
    bool in_global = false;  // Schur: participates in the interface system
  };
  std::vector<Domain> domains;
  std::vector<int> interface_offset;  // per domain, into the interface concat
  std::int64_t local_nnz_total = 0;

  // z := M^{-1} r
  void apply(const double* r, double* z) const;
  double memory_ratio() const;
  std::int64_t precond_cells() const;

  // Global interface rows, domain by domain (original numbering).
  std::vector<int> interface_rows() const;

  // Action of the assembled global interface (Schur) matrix in unpreconditioned
  // coordinates: sy = S y with y ordered like interface_rows(). Exposed so the
  // assembled operator can be checked against a dense construction.
  void apply_global_schur(const double* y, double* sy) const;
};

GlobalPreconditioner build_global_preconditioner(DdKind kind,
                                                 std::vector<LocalSystem> locals,
                                                 const DdParams& params);

// Schur variant: local factorizations keep interface supernodes out of every
// elimination level, so each local factorization ends exactly on its
// interface block, with the accumulated scaling and final positions tracked.
// Requires zero-overlap local systems.
GlobalPreconditioner build_schur_preconditioner(std::vector<LocalSystem> locals,
                                                const DdParams& params);

std::vector<double> bj_apply(const GlobalPreconditioner& gp,
                             std::span<const double> r);
std::vector<double> ras_apply(const GlobalPreconditioner& gp,
                              std::span<const double> r);
std::vector<double> schur_apply(const GlobalPreconditioner& gp,
                                std::span<const double> r);

}  // namespace vbarms
