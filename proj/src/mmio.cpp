#include "vbarms/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace vbarms {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open matrix file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) words.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

struct LineReader {
  std::string_view buf;
  std::size_t pos = 0;
  long line = 0;

  bool next(std::string_view& out) {
    if (pos >= buf.size()) return false;
    std::size_t end = buf.find('\n', pos);
    if (end == std::string_view::npos) end = buf.size();
    out = buf.substr(pos, end - pos);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    pos = end + 1;
    ++line;
    return true;
  }
};

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

CsrMatrix load_matrix_market(const std::string& path) {
  const std::string text = read_file(path);
  LineReader rd{text};
  std::string_view ln;

  if (!rd.next(ln)) throw ParseError("empty file: " + path, 0);
  auto header = split_words(ln);
  if (header.size() < 4 || lower(header[0]) != "%%matrixmarket")
    throw ParseError("missing MatrixMarket banner", rd.line);
  if (lower(header[1]) != "matrix")
    throw ParseError("unsupported object '" + header[1] + "'", rd.line);
  if (lower(header[2]) != "coordinate")
    throw ParseError("unsupported format '" + header[2] +
                         "' (only coordinate is handled)",
                     rd.line);
  const std::string field = lower(header.size() > 3 ? header[3] : "");
  const std::string symmetry = lower(header.size() > 4 ? header[4] : "general");
  if (field != "real" && field != "integer" && field != "pattern")
    throw ParseError("unsupported field '" + field +
                         "' (real, integer, or pattern required)",
                     rd.line);
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("unsupported symmetry '" + symmetry +
                         "' (general or symmetric required)",
                     rd.line);
  const bool pattern = field == "pattern";
  const bool symmetric = symmetry == "symmetric";

  // Size line: first non-comment, non-blank line.
  long n_rows = 0, n_cols = 0, n_entries = 0;
  for (;;) {
    if (!rd.next(ln)) throw ParseError("missing size line", rd.line);
    if (blank(ln) || ln.front() == '%') continue;
    auto words = split_words(ln);
    char* end = nullptr;
    if (words.size() != 3) throw ParseError("size line needs 3 fields", rd.line);
    n_rows = std::strtol(words[0].c_str(), &end, 10);
    if (*end) throw ParseError("bad row count '" + words[0] + "'", rd.line);
    n_cols = std::strtol(words[1].c_str(), &end, 10);
    if (*end) throw ParseError("bad column count '" + words[1] + "'", rd.line);
    n_entries = std::strtol(words[2].c_str(), &end, 10);
    if (*end) throw ParseError("bad entry count '" + words[2] + "'", rd.line);
    if (n_rows < 0 || n_cols < 0 || n_entries < 0)
      throw ParseError("negative size field", rd.line);
    break;
  }

  std::vector<Triplet> entries;
  entries.reserve(symmetric ? 2 * n_entries : n_entries);
  long seen = 0;
  while (seen < n_entries) {
    if (!rd.next(ln))
      throw ParseError("file ends after " + std::to_string(seen) + " of " +
                           std::to_string(n_entries) + " entries",
                       rd.line);
    if (blank(ln) || ln.front() == '%') continue;
    const char* p = ln.data();
    const char* lim = p + ln.size();
    char* end = nullptr;
    long i = std::strtol(p, &end, 10);
    if (end == p) throw ParseError("bad row index", rd.line);
    p = end;
    long j = std::strtol(p, &end, 10);
    if (end == p) throw ParseError("bad column index", rd.line);
    p = end;
    double v = 1.0;
    if (!pattern) {
      v = std::strtod(p, &end);
      if (end == p) throw ParseError("missing value", rd.line);
      p = end;
    }
    while (p < lim && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p != lim) throw ParseError("trailing characters after entry", rd.line);
    if (i < 1 || i > n_rows)
      throw ParseError("row index " + std::to_string(i) + " out of range",
                       rd.line);
    if (j < 1 || j > n_cols)
      throw ParseError("column index " + std::to_string(j) + " out of range",
                       rd.line);
    int r = static_cast<int>(i - 1);
    int c = static_cast<int>(j - 1);
    entries.push_back({r, c, v});
    if (symmetric && r != c) entries.push_back({c, r, v});
    ++seen;
  }
  return csr_from_triplets(static_cast<int>(n_rows), static_cast<int>(n_cols),
                           std::move(entries));
}

namespace {

constexpr char kCacheMagic[8] = {'V', 'B', 'C', 'S', 'R', 'B', 'I', 'N'};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

void save_csr_cache(const std::string& path, const CsrMatrix& a) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write cache file: " + path);
  out.write(kCacheMagic, sizeof(kCacheMagic));
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof(kCacheVersion));
  std::int64_t dims[3] = {a.n_rows, a.n_cols, a.nnz()};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(a.row_ptr.data()),
            static_cast<std::streamsize>(a.row_ptr.size() * sizeof(std::int64_t)));
  out.write(reinterpret_cast<const char*>(a.col_idx.data()),
            static_cast<std::streamsize>(a.col_idx.size() * sizeof(int)));
  out.write(reinterpret_cast<const char*>(a.values.data()),
            static_cast<std::streamsize>(a.values.size() * sizeof(double)));
  if (!out) throw Error("short write to cache file: " + path);
}

CsrMatrix load_csr_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open cache file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
    throw ParseError("not a matrix cache file: " + path);
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kCacheVersion)
    throw ParseError("cache version " + std::to_string(version) +
                     " not supported: " + path);
  std::int64_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] < 0 || dims[1] < 0 || dims[2] < 0)
    throw ParseError("corrupt cache header: " + path);
  CsrMatrix a;
  a.n_rows = static_cast<int>(dims[0]);
  a.n_cols = static_cast<int>(dims[1]);
  a.row_ptr.resize(a.n_rows + 1);
  a.col_idx.resize(dims[2]);
  a.values.resize(dims[2]);
  in.read(reinterpret_cast<char*>(a.row_ptr.data()),
          static_cast<std::streamsize>(a.row_ptr.size() * sizeof(std::int64_t)));
  in.read(reinterpret_cast<char*>(a.col_idx.data()),
          static_cast<std::streamsize>(a.col_idx.size() * sizeof(int)));
  in.read(reinterpret_cast<char*>(a.values.data()),
          static_cast<std::streamsize>(a.values.size() * sizeof(double)));
  if (!in) throw ParseError("truncated cache file: " + path);
  validate(a);
  return a;
}

CsrMatrix load_matrix(const std::string& path, bool use_cache) {
  const std::string cache = path + ".vbc";
  if (use_cache) {
    if (std::ifstream probe(cache, std::ios::binary); probe) {
      try {
        return load_csr_cache(cache);
      } catch (const Error&) {
        // Stale or foreign cache: fall through and rebuild.
      }
    }
  }
  CsrMatrix a = load_matrix_market(path);
  if (use_cache) {
    try {
      save_csr_cache(cache, a);
    } catch (const Error&) {
      // A read-only data directory is fine; the cache is an optimization.
    }
  }
  return a;
}

}  // namespace vbarms
