#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scrapest/types.hpp"

namespace scrapest::io {

/// Shortest decimal round-tripping the double exactly (%.17g with trailing
/// noise trimmed is not worth the bytes here; plain %.17g round-trips).
std::string format_double(double v);

/// RFC 4180 quoting: fields containing comma, quote or newline are quoted,
/// embedded quotes doubled.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

/// Full parse with quote handling; data rows must match the header width.
/// Throws ParseError with 1-based line numbers.
CsvTable read_csv(std::istream& is, const std::string& origin);
CsvTable read_csv_file(const std::filesystem::path& path);

double parse_double(const std::string& field, const std::string& origin, long line);
long parse_long(const std::string& field, const std::string& origin, long line);

}  // namespace scrapest::io
