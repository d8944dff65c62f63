#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace snipq::csv {

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
/// Embedded newlines inside quotes are not supported (none of our formats need them).
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Reads a CSV file whose first row must equal `expected_header`.
/// Each callback invocation receives the 1-based line number and the split fields;
/// rows with the wrong field count raise LineError.
class Reader {
 public:
  Reader(std::istream& in, std::string source, std::vector<std::string> expected_header);

  /// Returns false at end of input. Blank lines are skipped.
  bool next(std::vector<std::string>& fields);
  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t columns_;
  std::size_t line_ = 0;
};

}  // namespace snipq::csv
