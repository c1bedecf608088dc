#include "blp/metrics/confusion.hpp"

#include "blp/errors.hpp"

namespace blp {

namespace {
std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

std::optional<double> ConfusionCounts::recall() const { return ratio(tp, tp + fn); }
std::optional<double> ConfusionCounts::precision() const { return ratio(tp, tp + fp); }
std::optional<double> ConfusionCounts::fpr() const { return ratio(fp, fp + tn); }
std::optional<double> ConfusionCounts::predicted_positive_rate() const {
  return ratio(tp + fp, total());
}

void ConfusionCounts::add(int decision, double label) {
  const bool pos = label == 1.0;
  if (decision)
    ++(pos ? tp : fp);
  else
    ++(pos ? fn : tn);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

ConfusionCounts confusion(std::span<const int> decisions, std::span<const double> labels) {
  if (decisions.size() != labels.size()) throw ShapeError("confusion: length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < decisions.size(); ++i) c.add(decisions[i], labels[i]);
  return c;
}

std::map<std::string, ConfusionCounts> confusion_by_group(std::span<const int> decisions,
                                                          std::span<const double> labels,
                                                          std::span<const std::string> groups) {
  if (decisions.size() != labels.size() || decisions.size() != groups.size())
    throw ShapeError("confusion_by_group: length mismatch");
  std::map<std::string, ConfusionCounts> out;
  for (std::size_t i = 0; i < decisions.size(); ++i) out[groups[i]].add(decisions[i], labels[i]);
  return out;
}

}  // namespace blp
