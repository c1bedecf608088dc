#pragma once

#include <iosfwd>
#include <string>

#include "blp/nn/mlp.hpp"

namespace blp {

// Debug dump format, all little-endian:
//   u64 L, u64 layer_sizes[L], then for each layer the weights (row-major)
//   followed by the biases, as f64.
// Activations are not stored; the loader takes them as arguments.
void save_weights(std::ostream& out, const MlpParams& params);
MlpParams load_weights(std::istream& in, Activation output_activation,
                       Activation hidden_activation = Activation::relu);

void save_weights(const std::string& path, const MlpParams& params);
MlpParams load_weights(const std::string& path, Activation output_activation,
                       Activation hidden_activation = Activation::relu);

}  // namespace blp
