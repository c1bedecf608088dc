#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blp/data/dataset.hpp"

namespace blp {

// group: tracked as a group attribute only; categorical_group: both one-hot
// encoded as a feature and tracked as a group.
enum class ColumnKind { numeric, categorical, label, group, categorical_group, drop };

std::optional<ColumnKind> parse_column_kind(std::string_view s);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
};

struct DatasetSchema {
  std::vector<ColumnSpec> columns;  // file columns not listed are dropped
  std::string label_positive = "1";
  std::vector<std::string> missing_markers{"", "?", "NA"};
  char delimiter = ',';
  // FICO HELOC style: negative numeric codes are sentinels for "missing".
  bool negative_is_missing = false;
  // attribute -> (raw value -> group level); the key "*" is the fallback.
  std::map<std::string, std::map<std::string, std::string>> group_maps;
  // Normalise numerics with the first k data rows instead of the whole pool.
  std::optional<std::size_t> stats_rows;
};

// Rows whose label is missing are dropped. Missing numerics are imputed with
// the statistics mean (z = 0), missing categoricals get their own "missing"
// level. Categorical levels are sorted. A zero-variance numeric column is
// encoded as constant 0 and reported in `warnings`.
EncodedDataset load_csv_dataset(const std::string& path, const DatasetSchema& schema);
EncodedDataset parse_csv_dataset(std::istream& in, const DatasetSchema& schema,
                                 std::string name = "csv");

}  // namespace blp
