#pragma once

#include <functional>
#include <span>
#include <vector>

#include "blp/nn/mlp.hpp"

namespace blp {

struct GradCheckOptions {
  double step = 1e-5;
  double floor = 1e-8;
};

// max over parameters of |analytic - numeric| / max(floor, |numeric|), using
// central differences of `loss` as each parameter in `params` is perturbed in
// place (and restored). Parameters whose analytic and numeric gradients are
// both exactly zero are skipped.
double compare_with_central_differences(const std::function<double()>& loss,
                                        const std::vector<std::span<double>>& params,
                                        const std::vector<std::span<const double>>& analytic,
                                        const GradCheckOptions& opts = {});

// Summed loss of a single network: BCE for sigmoid heads, 0.5 * squared error
// against y (broadcast across outputs) otherwise.
double network_loss(const MlpParams& params, const Matrix& x, std::span<const double> y);

double finite_diff_check(const MlpParams& params, const Matrix& x, std::span<const double> y,
                         const GradCheckOptions& opts = {});

}  // namespace blp
