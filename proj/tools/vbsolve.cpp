// Command-line driver: load a Matrix Market file, discover block structure,
// build the requested preconditioner, and solve with flexible GMRES.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "vbarms/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Block-structured multilevel ILU solver"};

  vbarms::RunConfig cfg;
  std::string method = "graph";
  std::string rhs = "ones";
  bool exact_last = false;

  app.add_option("--matrix", cfg.matrix_path, "Matrix Market file")
      ->required();
  app.add_option("--method", method, "blocking method")
      ->check(CLI::IsMember({"checksum", "angle", "graph"}))
      ->capture_default_str();
  app.add_option("--tau", cfg.factor.compression.tau,
                 "cosine threshold for angle blocking")
      ->capture_default_str();
  app.add_option("--mu", cfg.factor.compression.mu,
                 "density floor for graph blocking")
      ->capture_default_str();
  app.add_option("--droptol", cfg.factor.drop_tol, "dropping threshold")
      ->capture_default_str();
  app.add_option("--levels", cfg.factor.max_levels, "elimination level cap")
      ->capture_default_str();
  app.add_option("--min-schur", cfg.factor.min_schur_size,
                 "stop recursing below this many rows")
      ->capture_default_str();
  app.add_option("--fill", cfg.factor.last_level_fill,
                 "stored blocks per row side at the last level, 0 = off")
      ->capture_default_str();
  app.add_flag("--exact-last-level", exact_last,
               "dense LU instead of incomplete factors at the last level");
  app.add_option("--precond", cfg.precond, "preconditioner layout")
      ->check(CLI::IsMember({"seq", "bj", "ras", "schur"}))
      ->capture_default_str();
  app.add_option("--domains", cfg.domains, "domain count")
      ->capture_default_str();
  app.add_option("--overlap", cfg.dd.overlap, "overlap rings (ras)")
      ->capture_default_str();
  app.add_option("--threads", cfg.dd.threads,
                 "worker threads, 0 = one per domain")
      ->capture_default_str();
  app.add_option("--tol", cfg.krylov.tol, "relative residual target")
      ->capture_default_str();
  app.add_option("--maxit", cfg.krylov.max_iters, "iteration budget")
      ->capture_default_str();
  app.add_option("--restart", cfg.krylov.restart_dim, "restart dimension")
      ->capture_default_str();
  app.add_option("--inner-its", cfg.dd.inner_iters,
                 "interface solve budget (schur)")
      ->capture_default_str();
  app.add_option("--inner-tol", cfg.dd.inner_tol,
                 "interface solve tolerance (schur)")
      ->capture_default_str();
  app.add_option("--rhs", rhs, "ones, random, or a file of values")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for the random rhs")
      ->capture_default_str();
  app.add_flag("--cache", cfg.use_cache,
               "reuse a binary sidecar next to the matrix file");
  app.add_option("--partition-file", cfg.domain_file,
                 "supernode-to-domain assignment to import");
  app.add_option("--write-blocking", cfg.blocking_out,
                 "write the discovered blocking, one block id per row");
  app.add_option("--report", cfg.report_path, "report file to write");
  app.add_option("--format", cfg.report_format, "report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  cfg.factor.compression.method = vbarms::compression_method_from_string(method);
  cfg.factor.exact_last_level = exact_last;
  if (rhs == "ones") {
    cfg.rhs = vbarms::RhsKind::ones;
  } else if (rhs == "random") {
    cfg.rhs = vbarms::RhsKind::random;
  } else {
    cfg.rhs = vbarms::RhsKind::file;
    cfg.rhs_path = rhs;
  }

  try {
    const vbarms::RunReport rep = vbarms::run(cfg);
    std::printf("matrix: %s  n: %d  nnz: %lld\n", rep.matrix.c_str(), rep.n,
                static_cast<long long>(rep.nnz));
    std::printf("blocking: %s  av_bd: %.4g  av_bs: %.4g  time: %.3gs\n",
                method.c_str(), rep.av_bd, rep.av_bs, rep.blocking_time);
    std::printf("factorization: %s  memory ratio: %.4g  time: %.3gs\n",
                cfg.precond.c_str(), rep.memory_ratio, rep.factor_time);
    if (rep.converged) {
      std::printf("solve: converged in %d iterations  relres: %.4g  time: %.3gs\n",
                  rep.iterations, rep.final_relres, rep.solve_time);
      return 0;
    }
    std::printf("solve: NOT converged after %d iterations  relres: %.4g  time: %.3gs\n",
                rep.iterations, rep.final_relres, rep.solve_time);
    std::fprintf(stderr, "error: iteration budget exhausted before reaching %g\n",
                 cfg.krylov.tol);
    return 2;
  } catch (const vbarms::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
