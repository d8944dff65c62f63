#include "snipq/csv.hpp"

#include "snipq/error.hpp"

namespace snipq::csv {

std::vector<std::string> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

Reader::Reader(std::istream& in, std::string source, std::vector<std::string> expected_header)
    : in_(in), source_(std::move(source)), columns_(expected_header.size()) {
  std::vector<std::string> header;
  if (!next(header)) throw LineError(source_, 1, "missing CSV header");
  if (header != expected_header) {
    std::string want;
    for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
    throw LineError(source_, line_, "unexpected CSV header, want '" + want + "'");
  }
}

bool Reader::next(std::vector<std::string>& fields) {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fields = split_line(raw);
    } catch (const DataError& e) {
      throw LineError(source_, line_, e.what());
    }
    if (columns_ != 0 && fields.size() != columns_) {
      throw LineError(source_, line_,
                      "expected " + std::to_string(columns_) + " fields, got " +
                          std::to_string(fields.size()));
    }
    return true;
  }
  return false;
}

}  // namespace snipq::csv
