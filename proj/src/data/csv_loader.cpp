#include "blp/data/csv_loader.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "blp/csv.hpp"
#include "blp/errors.hpp"

namespace blp {

std::optional<ColumnKind> parse_column_kind(std::string_view s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "label") return ColumnKind::label;
  if (s == "group") return ColumnKind::group;
  if (s == "categorical_group") return ColumnKind::categorical_group;
  if (s == "drop") return ColumnKind::drop;
  return std::nullopt;
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

constexpr const char* kMissingLevel = "missing";

}  // namespace

EncodedDataset parse_csv_dataset(std::istream& in, const DatasetSchema& schema, std::string name) {
  csv::Table table = csv::read_table(in, schema.delimiter);

  const ColumnSpec* label_spec = nullptr;
  for (const auto& c : schema.columns)
    if (c.kind == ColumnKind::label) {
      if (label_spec) throw DataError("schema declares more than one label column");
      label_spec = &c;
    }
  if (!label_spec) throw DataError("schema declares no label column");

  std::vector<std::size_t> col_index;
  for (const auto& c : schema.columns) col_index.push_back(table.column(c.name));

  auto is_missing = [&](const std::string& v) {
    return std::find(schema.missing_markers.begin(), schema.missing_markers.end(), v) !=
           schema.missing_markers.end();
  };

  // Trimmed cells of the kept rows, one vector per schema column.
  const std::size_t label_col = table.column(label_spec->name);
  std::vector<std::vector<std::string>> cells(schema.columns.size());
  std::vector<double> y;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw DataError("row " + std::to_string(r + 2) + " has " + std::to_string(row.size()) +
                      " fields, header has " + std::to_string(table.header.size()));
    const std::string label = trim(row[label_col]);
    if (is_missing(label)) continue;
    y.push_back(label == schema.label_positive ? 1.0 : 0.0);
    for (std::size_t c = 0; c < schema.columns.size(); ++c)
      cells[c].push_back(trim(row[col_index[c]]));
  }
  const std::size_t n = y.size();

  EncodedDataset ds;
  ds.name = std::move(name);
  ds.y = std::move(y);

  // First pass: widths and per-column encodings.
  struct Encoded {
    std::vector<double> numeric;          // z-scores
    std::vector<std::size_t> level_code;  // categorical
  };
  std::vector<Encoded> enc(schema.columns.size());
  std::size_t width = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const auto& spec = schema.columns[c];
    const auto& col = cells[c];
    if (spec.kind == ColumnKind::numeric) {
      std::vector<double> v(n);
      for (std::size_t r = 0; r < n; ++r) {
        if (is_missing(col[r])) {
          v[r] = std::nan("");
          continue;
        }
        try {
          v[r] = csv::parse_double(col[r]);
        } catch (const DataError&) {
          throw DataError("column '" + spec.name + "', data row " + std::to_string(r + 1) +
                          ": unparseable numeric '" + col[r] + "'");
        }
        if (schema.negative_is_missing && v[r] < 0.0) v[r] = std::nan("");
      }
      const std::size_t stats_n = std::min(n, schema.stats_rows.value_or(n));
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t r = 0; r < stats_n; ++r)
        if (!std::isnan(v[r])) {
          sum += v[r];
          ++count;
        }
      const double mean = count ? sum / static_cast<double>(count) : 0.0;
      double ss = 0.0;
      for (std::size_t r = 0; r < stats_n; ++r)
        if (!std::isnan(v[r])) ss += (v[r] - mean) * (v[r] - mean);
      const double sd = count ? std::sqrt(ss / static_cast<double>(count)) : 0.0;
      FeatureBlock block{spec.name, width, 1, false, {}, mean, sd};
      if (!(sd > 0.0)) {
        ds.warnings.push_back("column '" + spec.name + "' has zero variance; encoded as 0");
        for (double& e : v) e = 0.0;
        block.std = 0.0;
      } else {
        for (double& e : v) e = std::isnan(e) ? 0.0 : (e - mean) / sd;
      }
      enc[c].numeric = std::move(v);
      ds.encoding.push_back(block);
      width += 1;
    } else if (spec.kind == ColumnKind::categorical || spec.kind == ColumnKind::categorical_group) {
      std::set<std::string> level_set;
      for (const auto& v : col) level_set.insert(is_missing(v) ? kMissingLevel : v);
      std::vector<std::string> levels(level_set.begin(), level_set.end());
      enc[c].level_code.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::string key = is_missing(col[r]) ? kMissingLevel : col[r];
        enc[c].level_code[r] =
            static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), key) - levels.begin());
      }
      ds.encoding.push_back({spec.name, width, levels.size(), true, levels, 0.0, 1.0});
      width += levels.size();
    }
    if (spec.kind == ColumnKind::group || spec.kind == ColumnKind::categorical_group) {
      GroupColumn g;
      g.attribute = spec.name;
      const auto map_it = schema.group_maps.find(spec.name);
      std::vector<std::string> mapped(n);
      for (std::size_t r = 0; r < n; ++r) {
        std::string raw = is_missing(col[r]) ? kMissingLevel : col[r];
        if (map_it != schema.group_maps.end()) {
          const auto& m = map_it->second;
          if (auto hit = m.find(raw); hit != m.end())
            raw = hit->second;
          else if (auto star = m.find("*"); star != m.end())
            raw = star->second;
        }
        mapped[r] = std::move(raw);
      }
      std::set<std::string> level_set(mapped.begin(), mapped.end());
      g.levels.assign(level_set.begin(), level_set.end());
      g.codes.resize(n);
      for (std::size_t r = 0; r < n; ++r)
        g.codes[r] = static_cast<std::size_t>(
            std::lower_bound(g.levels.begin(), g.levels.end(), mapped[r]) - g.levels.begin());
      ds.groups.push_back(std::move(g));
    }
  }

  // Second pass: assemble the matrix.
  ds.x = Matrix(n, width);
  for (std::size_t c = 0, block = 0; c < schema.columns.size(); ++c) {
    const auto kind = schema.columns[c].kind;
    if (kind == ColumnKind::numeric) {
      const auto& fb = ds.encoding[block++];
      for (std::size_t r = 0; r < n; ++r) ds.x(r, fb.first) = enc[c].numeric[r];
    } else if (kind == ColumnKind::categorical || kind == ColumnKind::categorical_group) {
      const auto& fb = ds.encoding[block++];
      for (std::size_t r = 0; r < n; ++r) ds.x(r, fb.first + enc[c].level_code[r]) = 1.0;
    }
  }
  return ds;
}

EncodedDataset load_csv_dataset(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_csv_dataset(in, schema, path);
}

}  // namespace blp
