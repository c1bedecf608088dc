#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace blp {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  // nullopt marks the 0/0 case.
  std::optional<double> recall() const;
  std::optional<double> precision() const;
  std::optional<double> tpr() const { return recall(); }
  std::optional<double> fpr() const;
  std::optional<double> predicted_positive_rate() const;

  void add(int decision, double label);
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Labels here are ground truth for every point, so callers must hold oracle
// access to produce them.
ConfusionCounts confusion(std::span<const int> decisions, std::span<const double> labels);
std::map<std::string, ConfusionCounts> confusion_by_group(std::span<const int> decisions,
                                                          std::span<const double> labels,
                                                          std::span<const std::string> groups);

}  // namespace blp
