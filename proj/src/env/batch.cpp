#include "blp/env/batch.hpp"

namespace blp {

LabeledPoint::LabeledPoint(std::vector<double> features, double label,
                           std::optional<double> oracle_prob,
                           std::map<std::string, std::string> group_tags,
                           std::size_t dataset_index)
    : features_(std::move(features)),
      label_(label),
      oracle_prob_(oracle_prob),
      group_tags_(std::move(group_tags)),
      dataset_index_(dataset_index) {}

Matrix Batch::features() const {
  Matrix m;
  if (points.empty()) return m;
  m = Matrix(points.size(), points.front().features().size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& f = points[i].features();
    if (f.size() != m.cols()) throw ShapeError("batch points differ in dimension");
    std::copy(f.begin(), f.end(), m.row(i).begin());
  }
  return m;
}

std::vector<std::size_t> Batch::dataset_indices() const {
  std::vector<std::size_t> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.dataset_index());
  return out;
}

}  // namespace blp
