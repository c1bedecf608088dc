#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blp/metrics/confusion.hpp"

namespace blp {

using RateSeries = std::vector<std::optional<double>>;

struct GroupRates {
  RateSeries tpr, fpr;                  // per batch
  RateSeries tpr_smoothed, fpr_smoothed;
};

struct FairnessReport {
  std::string attribute;
  std::size_t window = 50;
  std::vector<std::string> groups;
  std::map<std::string, GroupRates> rates;
  // Largest |tpr_a - tpr_b| + |fpr_a - fpr_b| over group pairs; undefined
  // whenever some group's rate is undefined.
  RateSeries gap, gap_smoothed;

  std::size_t steps() const { return gap.size(); }
};

// Trailing-window mean over the defined entries; undefined when the window
// holds none.
RateSeries smooth(const RateSeries& raw, std::size_t window);

// per_step[t][group] holds the counts of step t+1. Throws PreconditionError
// when fewer than two groups appear.
FairnessReport fairness_report(const std::vector<std::map<std::string, ConfusionCounts>>& per_step,
                               std::string attribute, std::size_t window = 50);

// Mean of the defined entries of series[first, last); nullopt if none.
std::optional<double> mean_defined(const RateSeries& series, std::size_t first, std::size_t last);

// fairness CSV: step, group, tpr, fpr, gap (smoothed; raw under *_raw).
void write_fairness_csv_header(std::ostream& out, bool with_policy);
void write_fairness_csv(std::ostream& out, const FairnessReport& report,
                        const std::string* policy = nullptr);

}  // namespace blp
