#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blp/nn/matrix.hpp"

namespace blp {

// Capability token for reading labels that have not been revealed by an
// accept. Only metrics, regret accounting and test probes should hold one.
class OracleAccess {
 public:
  static OracleAccess grant() noexcept { return OracleAccess{}; }

 private:
  OracleAccess() = default;
};

class LabeledPoint {
 public:
  LabeledPoint(std::vector<double> features, double label, std::optional<double> oracle_prob,
               std::map<std::string, std::string> group_tags, std::size_t dataset_index);

  const std::vector<double>& features() const noexcept { return features_; }
  const std::map<std::string, std::string>& group_tags() const noexcept { return group_tags_; }
  std::size_t dataset_index() const noexcept { return dataset_index_; }

  double true_label(OracleAccess) const noexcept { return label_; }
  std::optional<double> oracle_prob(OracleAccess) const noexcept { return oracle_prob_; }

 private:
  friend class AcceptedSet;  // reveal-on-accept
  std::vector<double> features_;
  double label_;
  std::optional<double> oracle_prob_;
  std::map<std::string, std::string> group_tags_;
  std::size_t dataset_index_;
};

struct Batch {
  std::size_t step = 0;  // 1-based
  std::vector<LabeledPoint> points;

  std::size_t size() const noexcept { return points.size(); }
  // What a policy gets to see: one row per point, no labels.
  Matrix features() const;
  std::vector<std::size_t> dataset_indices() const;
};

}  // namespace blp
