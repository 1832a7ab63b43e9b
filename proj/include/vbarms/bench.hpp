#pragma once

#include <cstdint>
#include <string>

#include "vbarms/dd.hpp"
#include "vbarms/krylov.hpp"
#include "vbarms/vbarms.hpp"

namespace vbarms {

enum class RhsKind { ones, random, file };

// One benchmark run: load, block, factorize, solve, report.
struct RunConfig {
  std::string matrix_path;
  bool use_cache = false;

  RhsKind rhs = RhsKind::ones;  // ones: b = A*1 so the solution is known
  std::uint64_t seed = 0;       // random rhs entries, uniform in [-1, 1)
  std::string rhs_path;         // whitespace-separated values, one per row

  FactorParams factor{};
  KrylovParams krylov{};

  std::string precond = "seq";  // seq | bj | ras | schur
  int domains = 1;
  DdParams dd{};                // factor field is ignored; `factor` wins

  std::string report_path;      // empty: no report file
  std::string report_format = "json";  // json | csv (csv appends)

  std::string domain_file;      // import the supernode->domain assignment
  std::string blocking_out;     // export the discovered blocking, one id per row

  void validate() const;
};

struct RunReport {
  std::string matrix;  // file name without directories or extension
  int n = 0;
  std::int64_t nnz = 0;
  double av_bd = 0.0;
  double av_bs = 0.0;
  double blocking_time = 0.0;  // seconds, wall clock
  double factor_time = 0.0;
  double solve_time = 0.0;
  double total_time = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_relres = 0.0;
  double memory_ratio = 0.0;
};

// Executes the pipeline. Errors from any stage are rethrown with the stage
// name prefixed. Writes the report file when the config asks for one.
RunReport run(const RunConfig& config);

// JSON object with every RunReport field; non-finite numbers become the
// string "nan" and are read back as quiet NaN.
std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

// Flat table form. The row repeats the identifying config columns so rows
// from different runs can be concatenated into one table.
std::string csv_header();
std::string csv_row(const RunConfig& c, const RunReport& r);

// Honors config.report_path/report_format: JSON overwrites, CSV appends and
// writes the header only when the file starts empty.
void emit_report(const RunConfig& c, const RunReport& r);

}  // namespace vbarms
