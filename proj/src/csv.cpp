#include "scrapest/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace scrapest::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << '\n';
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(std::istream& is, const std::string& origin) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  long line = 1;
  long record_line = 1;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (record.size() == 1 && record[0].empty() && !field_started) {
      record.clear();
      return;  // blank line
    }
    if (table.header.empty()) {
      table.header = record;
    } else {
      if (record.size() != table.header.size()) {
        std::ostringstream os;
        os << origin << ":" << record_line << ": row has " << record.size()
           << " fields, header has " << table.header.size();
        throw ParseError(os.str());
      }
      table.rows.push_back(record);
    }
    record.clear();
  };

  char ch;
  while (is.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (is.peek() == '"') {
          is.get();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
        if (ch == '\n') ++line;
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_field();
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += ch;
        field_started = true;
        break;
    }
  }
  if (in_quotes) throw ParseError(origin + ": unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) {
    end_field();
    end_record();
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_csv(is, path.string());
}

double parse_double(const std::string& field, const std::string& origin, long line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << origin << ":" << line << ": not a number: '" << field << "'";
    throw ParseError(os.str());
  }
}

long parse_long(const std::string& field, const std::string& origin, long line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << origin << ":" << line << ": not an integer: '" << field << "'";
    throw ParseError(os.str());
  }
}

}  // namespace scrapest::io
