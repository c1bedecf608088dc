#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "blp/nn/matrix.hpp"

namespace blp {

enum class Activation { relu, sigmoid, identity };

// Dense feed-forward network. weights[i] is layer_sizes[i] x layer_sizes[i+1].
// Hidden layers use hidden_activation, the last layer output_activation.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::sigmoid;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Gradient (or Adam moment) storage shaped like an MlpParams.
struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static MlpGrads zeros_like(const MlpParams& p);
  void set_zero();
  bool all_finite() const;
  void add_scaled(const MlpGrads& other, double scale);

  friend bool operator==(const MlpGrads&, const MlpGrads&) = default;
};

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.
MlpParams make_mlp(std::vector<std::size_t> layer_sizes, Activation output_activation,
                   std::uint64_t seed);
MlpParams make_zero_mlp(std::vector<std::size_t> layer_sizes, Activation output_activation);

// Post-activation values per layer; post[0] is the input, post.back() the output.
struct ForwardCache {
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

Matrix mlp_forward(const MlpParams& params, const Matrix& x);
Matrix mlp_forward(const MlpParams& params, const Matrix& x, ForwardCache& cache);

// Convenience for single-output networks: column 0 of the output as a vector.
std::vector<double> mlp_predict(const MlpParams& params, const Matrix& x);

// Where the upstream gradient is taken. `logits` skips the output activation's
// derivative, which is how the fused sigmoid + BCE gradient p - y is fed in.
enum class GradientAt { output, logits };

struct BackwardResult {
  MlpGrads grads;
  Matrix input_grad;
};

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& upstream, GradientAt at = GradientAt::output);
BackwardResult mlp_backward(const MlpParams& params, const Matrix& x, const Matrix& upstream,
                            GradientAt at = GradientAt::output);

// Views over every parameter (weights then bias, layer by layer) in a fixed order.
std::vector<std::span<double>> parameter_blocks(MlpParams& p);
std::vector<std::span<const double>> gradient_blocks(const MlpGrads& g);

}  // namespace blp
