#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blp/nn/matrix.hpp"

namespace blp {

// A protected (or otherwise tracked) attribute, one category code per row.
struct GroupColumn {
  std::string attribute;
  std::vector<std::string> levels;
  std::vector<std::size_t> codes;

  const std::string& level_of(std::size_t row) const { return levels[codes[row]]; }

  friend bool operator==(const GroupColumn&, const GroupColumn&) = default;
};

// Where an original column ended up in the encoded feature matrix.
struct FeatureBlock {
  std::string name;
  std::size_t first = 0;
  std::size_t width = 1;
  bool categorical = false;
  std::vector<std::string> levels;  // categorical only, in column order
  double mean = 0.0;                // numeric only
  double std = 1.0;

  friend bool operator==(const FeatureBlock&, const FeatureBlock&) = default;
};

struct EncodedDataset {
  std::string name;
  Matrix x;
  std::vector<double> y;            // 0/1
  std::vector<double> oracle_prob;  // rho*(x), synthetic data only; empty otherwise
  std::vector<GroupColumn> groups;
  std::vector<FeatureBlock> encoding;
  std::vector<std::string> warnings;

  std::size_t size() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
  bool has_oracle() const { return !oracle_prob.empty(); }
  const GroupColumn* group(std::string_view attribute) const;
  double positive_rate() const;

  friend bool operator==(const EncodedDataset&, const EncodedDataset&) = default;
};

}  // namespace blp
