#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "blp/env/batch.hpp"
#include "blp/nn/matrix.hpp"

namespace blp {

struct Provenance {
  std::size_t step = 0;
  std::size_t index_in_batch = 0;
  std::size_t dataset_index = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// The growing set of accepted points with their revealed labels.
class AcceptedSet {
 public:
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<double>& labels() const noexcept { return labels_; }
  const std::vector<Provenance>& provenance() const noexcept { return provenance_; }
  std::size_t last_step() const noexcept { return last_step_; }

  // Adds the accepted points of `batch`, in batch order. Returns the revealed
  // label per point (nullopt for rejected ones). Throws StateError when the
  // step was already applied, ShapeError on a length mismatch.
  std::vector<std::optional<double>> apply_decisions(const Batch& batch,
                                                     std::span<const int> decisions);

  friend bool operator==(const AcceptedSet&, const AcceptedSet&) = default;

 private:
  Matrix features_;
  std::vector<double> labels_;
  std::vector<Provenance> provenance_;
  std::size_t last_step_ = 0;
};

}  // namespace blp
