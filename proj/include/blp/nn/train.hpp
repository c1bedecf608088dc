#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blp/nn/adam.hpp"
#include "blp/nn/mlp.hpp"

namespace blp {

struct TrainOptions {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_losses;  // mean BCE per sample, per epoch
};

// Mini-batch BCE training of a sigmoid-head network with Adam. Each epoch
// visits the rows in a seeded shuffle. Throws PreconditionError on an empty
// dataset.
TrainReport train_supervised(MlpParams& params, AdamState& state, const Matrix& x,
                             std::span<const double> y, const TrainOptions& opts);

double accuracy(const MlpParams& params, const Matrix& x, std::span<const double> y);

}  // namespace blp
