#include "blp/data/dataset.hpp"

#include <numeric>

namespace blp {

const GroupColumn* EncodedDataset::group(std::string_view attribute) const {
  for (const auto& g : groups)
    if (g.attribute == attribute) return &g;
  return nullptr;
}

double EncodedDataset::positive_rate() const {
  if (y.empty()) return 0.0;
  return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

}  // namespace blp
