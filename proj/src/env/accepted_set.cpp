#include "blp/env/accepted_set.hpp"

#include "blp/errors.hpp"

namespace blp {

std::vector<std::optional<double>> AcceptedSet::apply_decisions(const Batch& batch,
                                                                std::span<const int> decisions) {
  if (decisions.size() != batch.size())
    throw ShapeError("apply_decisions: " + std::to_string(decisions.size()) + " decisions for " +
                     std::to_string(batch.size()) + " points");
  if (batch.step <= last_step_)
    throw StateError("decisions for step " + std::to_string(batch.step) +
                     " already applied (last applied step " + std::to_string(last_step_) + ")");
  std::vector<std::optional<double>> revealed(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (decisions[i] != 0 && decisions[i] != 1)
      throw PreconditionError("decision must be 0 or 1");
    if (!decisions[i]) continue;
    const LabeledPoint& p = batch.points[i];
    features_.append_row(p.features_);
    labels_.push_back(p.label_);
    provenance_.push_back({batch.step, i, p.dataset_index()});
    revealed[i] = p.label_;
  }
  last_step_ = batch.step;
  return revealed;
}

}  // namespace blp
