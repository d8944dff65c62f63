#pragma once

#include <stdexcept>
#include <string>

namespace snipq {

/// Malformed or invalid input data. The CLI maps this to exit code 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read or written, or a remote call failed (exit code 2).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation had nothing to work on, e.g. a slot filter matched no entity (exit code 3).
class EmptyResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse or validation failure tied to a line of an input file.
class LineError : public DataError {
 public:
  LineError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace snipq
