#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blp::csv {

// RFC-4180 style: fields containing the delimiter, a quote, CR or LF are
// quoted and embedded quotes doubled.
std::string escape(std::string_view field, char delim = ',');
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delim = ',');

// Reads one record, honouring quoted fields that span lines. Returns nullopt at
// end of input. Throws DataError on an unterminated quote.
std::optional<std::vector<std::string>> read_row(std::istream& in, char delim = ',');

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(std::string_view name) const;  // throws DataError when absent
};

Table read_table(std::istream& in, char delim = ',');
Table read_table(const std::string& path, char delim = ',');

// Shortest round-trip decimal form of a double ("" for NaN).
std::string format_double(double v);
// Empty (or all-blank) input parses as NaN; anything else unparseable throws DataError.
double parse_double(std::string_view s);

}  // namespace blp::csv
