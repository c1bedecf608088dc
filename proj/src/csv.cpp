#include "blp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "blp/errors.hpp"

namespace blp::csv {

std::string escape(std::string_view field, char delim) {
  const bool needs_quotes = field.find_first_of(std::string{delim, '"', '\r', '\n'}) !=
                            std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delim) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << delim;
    out << escape(fields[i], delim);
  }
  out << '\n';
}

std::optional<std::vector<std::string>> read_row(std::istream& in, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false, any = false;
  int ch;
  while ((ch = in.get()) != std::char_traits<char>::eof()) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return fields;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  if (!any) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("csv: unknown column '" + std::string(name) + "'");
}

Table read_table(std::istream& in, char delim) {
  Table t;
  auto head = read_row(in, delim);
  if (!head) throw DataError("csv: missing header row");
  t.header = std::move(*head);
  if (!t.header.empty() && t.header[0].starts_with("\xEF\xBB\xBF")) t.header[0].erase(0, 3);
  while (auto row = read_row(in, delim)) {
    if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
    t.rows.push_back(std::move(*row));
  }
  return t;
}

Table read_table(const std::string& path, char delim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_table(in, delim);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError("cannot parse number '" + std::string(s) + "'");
  return v;
}

}  // namespace blp::csv
