#pragma once

#include <stdexcept>
#include <string>

namespace vbarms {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based, 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, long line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Shape or index mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A structurally zero row or column makes two-sided scaling impossible.
class SingularScalingError : public Error {
 public:
  SingularScalingError(const std::string& msg, int index)
      : Error(msg + " (index " + std::to_string(index) + ")"), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

// A diagonal pivot block is numerically singular. level/block_row are -1
// when the failure happens outside a multilevel factorization.
class SingularPivotError : public Error {
 public:
  SingularPivotError(double magnitude, int level = -1, int block_row = -1)
      : Error("singular pivot block (|pivot| = " + std::to_string(magnitude) +
              (level >= 0 ? ", level " + std::to_string(level) : std::string()) +
              (block_row >= 0 ? ", block row " + std::to_string(block_row)
                              : std::string()) +
              ")"),
        magnitude_(magnitude),
        level_(level),
        block_row_(block_row) {}
  double magnitude() const { return magnitude_; }
  int level() const { return level_; }
  int block_row() const { return block_row_; }

 private:
  double magnitude_;
  int level_;
  int block_row_;
};

// Iteration produced a non-finite value; the run cannot continue.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace vbarms
