#pragma once

#include <string>

#include "vbarms/csr.hpp"

namespace vbarms {

// Reads a Matrix Market coordinate file. Accepts real, integer, and pattern
// fields with general or symmetric symmetry; symmetric inputs are expanded to
// the full matrix, duplicate entries are summed, pattern entries get value 1.
// Throws ParseError with the offending line number on malformed input.
CsrMatrix load_matrix_market(const std::string& path);

// Binary snapshot of a CSR matrix. The format is versioned; loading rejects
// mismatched magic or version with a ParseError.
void save_csr_cache(const std::string& path, const CsrMatrix& a);
CsrMatrix load_csr_cache(const std::string& path);

// Loads `path`, preferring a sidecar cache (`path` + ".vbc") when use_cache
// is set. A missing or stale cache is rebuilt after parsing.
CsrMatrix load_matrix(const std::string& path, bool use_cache);

}  // namespace vbarms
