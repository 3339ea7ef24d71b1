#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hddrul {

// Bad user configuration: unknown keys, invalid values, shape mismatches
// between a model and the data handed to it.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that violates a corpus or file-format invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Row-level parse failure. `row()` is the zero-based data row index (the
// header is not counted).
class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// A non-finite value appeared where finite arithmetic is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hddrul
