#pragma once

#include <span>
#include <vector>

namespace blp {

// Probabilities are clipped into [kProbClip, 1 - kProbClip] before any log.
inline constexpr double kProbClip = 1e-7;

double sigmoid(double z);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d p_i
};

// loss = sum_i w_i * (-y_i log p_i - (1 - y_i) log(1 - p_i)), with w_i = 1 when
// `weights` is empty. Throws ShapeError on length mismatch.
LossResult bce_loss(std::span<const double> p, std::span<const double> y,
                    std::span<const double> weights = {});

// Gradient of the same loss with respect to the pre-sigmoid logits,
// w_i * (p_i - y_i), scaled by `scale`. This is what training feeds to
// mlp_backward(GradientAt::logits); it does not vanish for saturated outputs.
std::vector<double> bce_logit_grad(std::span<const double> p, std::span<const double> y,
                                   std::span<const double> weights = {}, double scale = 1.0);

}  // namespace blp
