#include "vbarms/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "vbarms/compression.hpp"
#include "vbarms/mmio.hpp"
#include "vbarms/quotient.hpp"

namespace vbarms {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Portable deterministic uniform draw in [-1, 1).
double unit_draw(std::mt19937_64& rng) {
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

std::vector<double> make_rhs(const RunConfig& cfg, const CsrMatrix& a) {
  const int n = a.n_rows;
  switch (cfg.rhs) {
    case RhsKind::ones: {
      std::vector<double> x(n, 1.0), b(n);
      spmv(a, x.data(), b.data());
      return b;
    }
    case RhsKind::random: {
      std::mt19937_64 rng(cfg.seed);
      std::vector<double> b(n);
      for (double& v : b) v = unit_draw(rng);
      return b;
    }
    case RhsKind::file: {
      std::ifstream in(cfg.rhs_path);
      if (!in) throw Error("cannot open rhs file '" + cfg.rhs_path + "'");
      std::vector<double> b(n);
      for (int i = 0; i < n; ++i)
        if (!(in >> b[i]))
          throw ParseError("rhs file '" + cfg.rhs_path + "' ended after " +
                           std::to_string(i) + " of " + std::to_string(n) +
                           " values");
      return b;
    }
  }
  throw Error("unknown rhs kind");
}

std::string matrix_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

nlohmann::json num_or_nan(double v) {
  if (std::isfinite(v)) return v;
  return "nan";
}

double nan_or_num(const nlohmann::json& j) {
  if (j.is_string()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

std::string csv_num(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  if (matrix_path.empty()) throw Error("no matrix path given");
  factor.validate();
  krylov.validate();
  if (precond != "seq" && precond != "bj" && precond != "ras" &&
      precond != "schur")
    throw Error("unknown preconditioner '" + precond + "'");
  if (domains < 1) throw Error("domain count must be at least 1");
  if (dd.overlap < 0) throw Error("overlap must be nonnegative");
  if (rhs == RhsKind::file && rhs_path.empty())
    throw Error("rhs kind 'file' needs a path");
  if (report_format != "json" && report_format != "csv")
    throw Error("unknown report format '" + report_format + "'");
}

RunReport run(const RunConfig& cfg) {
  cfg.validate();
  const auto t_total = Clock::now();
  RunReport rep;
  rep.matrix = matrix_stem(cfg.matrix_path);

  const CsrMatrix a = stage("load", [&] {
    CsrMatrix m = load_matrix(cfg.matrix_path, cfg.use_cache);
    if (m.n_rows != m.n_cols)
      throw DimensionError("matrix is not square");
    return m;
  });
  rep.n = a.n_rows;
  rep.nnz = a.nnz();

  const auto t_block = Clock::now();
  const BlockPartition part =
      stage("blocking", [&] { return compress(a, cfg.factor.compression); });
  rep.blocking_time = seconds_since(t_block);
  {
    const BlockMetrics bm = block_metrics(a, part);
    rep.av_bd = bm.average_block_density;
    rep.av_bs = bm.average_block_size;
  }
  if (!cfg.blocking_out.empty()) {
    stage("blocking", [&] {
      std::ofstream out(cfg.blocking_out);
      if (!out)
        throw Error("cannot open blocking file '" + cfg.blocking_out + "'");
      write_partition(out, part);
      return 0;
    });
  }

  const std::vector<double> b = stage("rhs", [&] { return make_rhs(cfg, a); });

  // Factorization: sequential multilevel or one of the domain-decomposed
  // forms. Either way the apply closure and the memory ratio come out.
  LinearOperator apply_m;
  VbarmsPreconditioner seq;
  GlobalPreconditioner gp;
  const auto t_factor = Clock::now();
  if (cfg.precond == "seq") {
    seq = stage("factorization",
                [&] { return vbarms_from_partition(a, part, cfg.factor); });
    rep.memory_ratio = seq.memory_ratio();
    apply_m = [&seq](const double* r, double* z) { seq.apply(r, z); };
  } else {
    gp = stage("factorization", [&] {
      const AdjacencyGraph g = symmetrized_pattern(a);
      const QuotientGraph q = build_quotient_graph(g, part);
      DomainMap map;
      if (!cfg.domain_file.empty()) {
        std::ifstream in(cfg.domain_file);
        if (!in)
          throw Error("cannot open domain file '" + cfg.domain_file + "'");
        map = read_domain_map(in, q);
      } else {
        map = partition_quotient_graph(q, cfg.domains);
      }
      std::vector<LocalSystem> locals =
          build_local_systems(a, part, map, cfg.dd.overlap);
      DdParams dp = cfg.dd;
      dp.factor = cfg.factor;
      return build_global_preconditioner(dd_kind_from_string(cfg.precond),
                                         std::move(locals), dp);
    });
    rep.memory_ratio = gp.memory_ratio();
    apply_m = [&gp](const double* r, double* z) { gp.apply(r, z); };
  }
  rep.factor_time = seconds_since(t_factor);

  const auto t_solve = Clock::now();
  std::vector<double> x(a.n_rows, 0.0);
  const SolveStats st = stage("solve", [&] {
    LinearOperator apply_a = [&a](const double* p, double* y) {
      spmv(a, p, y);
    };
    return fgmres(a.n_rows, apply_a, apply_m, b, x, cfg.krylov);
  });
  rep.solve_time = seconds_since(t_solve);
  rep.iterations = st.iterations;
  rep.converged = st.converged;
  rep.final_relres = st.final_relres;
  rep.total_time = seconds_since(t_total);

  if (!cfg.report_path.empty()) stage("report", [&] { emit_report(cfg, rep); return 0; });
  return rep;
}

std::string report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["matrix"] = r.matrix;
  j["n"] = r.n;
  j["nnz"] = r.nnz;
  j["av_bd"] = num_or_nan(r.av_bd);
  j["av_bs"] = num_or_nan(r.av_bs);
  j["blocking_time"] = num_or_nan(r.blocking_time);
  j["factor_time"] = num_or_nan(r.factor_time);
  j["solve_time"] = num_or_nan(r.solve_time);
  j["total_time"] = num_or_nan(r.total_time);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_relres"] = num_or_nan(r.final_relres);
  j["memory_ratio"] = num_or_nan(r.memory_ratio);
  return j.dump(2);
}

RunReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad report json: ") + e.what());
  }
  try {
    RunReport r;
    r.matrix = j.at("matrix").get<std::string>();
    r.n = j.at("n").get<int>();
    r.nnz = j.at("nnz").get<std::int64_t>();
    r.av_bd = nan_or_num(j.at("av_bd"));
    r.av_bs = nan_or_num(j.at("av_bs"));
    r.blocking_time = nan_or_num(j.at("blocking_time"));
    r.factor_time = nan_or_num(j.at("factor_time"));
    r.solve_time = nan_or_num(j.at("solve_time"));
    r.total_time = nan_or_num(j.at("total_time"));
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    r.final_relres = nan_or_num(j.at("final_relres"));
    r.memory_ratio = nan_or_num(j.at("memory_ratio"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad report json: ") + e.what());
  }
}

std::string csv_header() {
  return "matrix,n,nnz,method,tau,mu,droptol,levels,min_schur,precond,domains,"
         "overlap,tol,maxit,restart,seed,av_bd,av_bs,blocking_time,"
         "factor_time,solve_time,total_time,iterations,converged,"
         "final_relres,memory_ratio";
}

std::string csv_row(const RunConfig& c, const RunReport& r) {
  std::ostringstream os;
  os << r.matrix << ',' << r.n << ',' << r.nnz << ','
     << to_string(c.factor.compression.method) << ','
     << csv_num(c.factor.compression.tau) << ','
     << csv_num(c.factor.compression.mu) << ','
     << csv_num(c.factor.drop_tol) << ',' << c.factor.max_levels << ','
     << c.factor.min_schur_size << ',' << c.precond << ',' << c.domains << ','
     << c.dd.overlap << ',' << csv_num(c.krylov.tol) << ','
     << c.krylov.max_iters << ',' << c.krylov.restart_dim << ',' << c.seed
     << ',' << csv_num(r.av_bd) << ',' << csv_num(r.av_bs) << ','
     << csv_num(r.blocking_time) << ',' << csv_num(r.factor_time) << ','
     << csv_num(r.solve_time) << ',' << csv_num(r.total_time) << ','
     << r.iterations << ',' << (r.converged ? 1 : 0) << ','
     << csv_num(r.final_relres) << ',' << csv_num(r.memory_ratio);
  return os.str();
}

void emit_report(const RunConfig& c, const RunReport& r) {
  if (c.report_path.empty()) throw Error("no report path configured");
  if (c.report_format == "json") {
    std::ofstream out(c.report_path, std::ios::trunc);
    if (!out) throw Error("cannot open report file '" + c.report_path + "'");
    out << report_to_json(r) << '\n';
    if (!out) throw Error("failed writing report file '" + c.report_path + "'");
    return;
  }
  std::error_code ec;
  const bool fresh = std::filesystem::file_size(c.report_path, ec) == 0 || ec;
  std::ofstream out(c.report_path, std::ios::app);
  if (!out) throw Error("cannot open report file '" + c.report_path + "'");
  if (fresh) out << csv_header() << '\n';
  out << csv_row(c, r) << '\n';
  if (!out) throw Error("failed writing report file '" + c.report_path + "'");
}

}  // namespace vbarms
