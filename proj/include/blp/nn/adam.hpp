#pragma once

#include <cstdint>

#include "blp/nn/mlp.hpp"

namespace blp {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  MlpGrads m;
  MlpGrads v;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-3;

  static AdamState for_params(const MlpParams& p, const AdamConfig& cfg = {});
  void reset();

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam update. A non-finite gradient entry throws
// NumericError and leaves both params and state untouched.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

}  // namespace blp
