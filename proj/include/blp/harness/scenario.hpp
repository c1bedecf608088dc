#pragma once

#include <memory>
#include <vector>

#include "blp/data/dataset.hpp"
#include "blp/harness/config.hpp"

namespace blp {

// A dataset loaded once and shared read-only by every run, plus the rows
// served as the first batch (empty for plain sampling).
struct Scenario {
  std::shared_ptr<const EncodedDataset> data;
  std::vector<std::size_t> lead_in;
};

// Rows are tagged with attribute "cluster" (levels group_a / group_b).
Scenario make_two_cluster(const TwoClusterSpec& spec);

// Throws DataError when a file cannot be read or parsed.
Scenario load_scenario(const DatasetConfig& config);

}  // namespace blp
