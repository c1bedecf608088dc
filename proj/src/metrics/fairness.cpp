#include "blp/metrics/fairness.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "blp/csv.hpp"
#include "blp/errors.hpp"

namespace blp {

RateSeries smooth(const RateSeries& raw, std::size_t window) {
  if (window == 0) throw PreconditionError("smoothing window must be >= 1");
  RateSeries out(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = t + 1 - std::min(window, t + 1); k <= t; ++k)
      if (raw[k]) {
        sum += *raw[k];
        ++count;
      }
    if (count) out[t] = sum / static_cast<double>(count);
  }
  return out;
}

namespace {

RateSeries pairwise_gap(const std::vector<std::string>& groups,
                        const std::map<std::string, GroupRates>& rates, bool smoothed,
                        std::size_t steps) {
  RateSeries gap(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    bool defined = true;
    double best = 0.0;
    for (std::size_t a = 0; a < groups.size() && defined; ++a)
      for (std::size_t b = a + 1; b < groups.size() && defined; ++b) {
        const GroupRates& ra = rates.at(groups[a]);
        const GroupRates& rb = rates.at(groups[b]);
        const auto& ta = smoothed ? ra.tpr_smoothed[t] : ra.tpr[t];
        const auto& tb = smoothed ? rb.tpr_smoothed[t] : rb.tpr[t];
        const auto& fa = smoothed ? ra.fpr_smoothed[t] : ra.fpr[t];
        const auto& fb = smoothed ? rb.fpr_smoothed[t] : rb.fpr[t];
        if (!ta || !tb || !fa || !fb) {
          defined = false;
          break;
        }
        best = std::max(best, std::abs(*ta - *tb) + std::abs(*fa - *fb));
      }
    if (defined) gap[t] = best;
  }
  return gap;
}

}  // namespace

FairnessReport fairness_report(const std::vector<std::map<std::string, ConfusionCounts>>& per_step,
                               std::string attribute, std::size_t window) {
  std::set<std::string> seen;
  for (const auto& step : per_step)
    for (const auto& [g, _] : step) seen.insert(g);
  if (seen.size() < 2)
    throw PreconditionError("fairness report on '" + attribute + "' needs at least two groups");

  FairnessReport r;
  r.attribute = std::move(attribute);
  r.window = window;
  r.groups.assign(seen.begin(), seen.end());
  const std::size_t steps = per_step.size();
  for (const auto& g : r.groups) {
    GroupRates gr;
    gr.tpr.resize(steps);
    gr.fpr.resize(steps);
    for (std::size_t t = 0; t < steps; ++t)
      if (auto it = per_step[t].find(g); it != per_step[t].end()) {
        gr.tpr[t] = it->second.tpr();
        gr.fpr[t] = it->second.fpr();
      }
    gr.tpr_smoothed = smooth(gr.tpr, window);
    gr.fpr_smoothed = smooth(gr.fpr, window);
    r.rates.emplace(g, std::move(gr));
  }
  r.gap = pairwise_gap(r.groups, r.rates, false, steps);
  r.gap_smoothed = pairwise_gap(r.groups, r.rates, true, steps);
  return r;
}

std::optional<double> mean_defined(const RateSeries& series, std::size_t first, std::size_t last) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = first; t < std::min(last, series.size()); ++t)
    if (series[t]) {
      sum += *series[t];
      ++n;
    }
  if (!n) return std::nullopt;
  return sum / static_cast<double>(n);
}

namespace {
std::string cell(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }
}  // namespace

void write_fairness_csv_header(std::ostream& out, bool with_policy) {
  std::vector<std::string> h;
  if (with_policy) h.push_back("policy");
  for (const char* c : {"step", "group", "tpr", "fpr", "gap", "tpr_raw", "fpr_raw", "gap_raw"})
    h.push_back(c);
  csv::write_row(out, h);
}

void write_fairness_csv(std::ostream& out, const FairnessReport& report, const std::string* policy) {
  for (std::size_t t = 0; t < report.steps(); ++t)
    for (const auto& g : report.groups) {
      const GroupRates& gr = report.rates.at(g);
      std::vector<std::string> row;
      if (policy) row.push_back(*policy);
      row.insert(row.end(), {std::to_string(t + 1), g, cell(gr.tpr_smoothed[t]),
                             cell(gr.fpr_smoothed[t]), cell(report.gap_smoothed[t]), cell(gr.tpr[t]),
                             cell(gr.fpr[t]), cell(report.gap[t])});
      csv::write_row(out, row);
    }
}

}  // namespace blp
