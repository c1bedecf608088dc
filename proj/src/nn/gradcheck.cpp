#include "blp/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "blp/errors.hpp"
#include "blp/nn/loss.hpp"

namespace blp {

double compare_with_central_differences(const std::function<double()>& loss,
                                        const std::vector<std::span<double>>& params,
                                        const std::vector<std::span<const double>>& analytic,
                                        const GradCheckOptions& opts) {
  if (params.size() != analytic.size()) throw ShapeError("gradcheck: block count mismatch");
  double worst = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != analytic[b].size()) throw ShapeError("gradcheck: block size mismatch");
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      double& theta = params[b][i];
      const double saved = theta;
      theta = saved + opts.step;
      const double up = loss();
      theta = saved - opts.step;
      const double down = loss();
      theta = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[b][i];
      if (a == 0.0 && numeric == 0.0) continue;
      worst = std::max(worst, std::abs(a - numeric) / std::max(opts.floor, std::abs(numeric)));
    }
  }
  return worst;
}

double network_loss(const MlpParams& params, const Matrix& x, std::span<const double> y) {
  Matrix out = mlp_forward(params, x);
  if (y.size() != out.rows()) throw ShapeError("network_loss: label count mismatch");
  if (params.output_activation == Activation::sigmoid && out.cols() == 1)
    return bce_loss(out.flat(), y).loss;
  double s = 0.0;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const double d = out(r, c) - y[r];
      s += 0.5 * d * d;
    }
  return s;
}

double finite_diff_check(const MlpParams& params, const Matrix& x, std::span<const double> y,
                         const GradCheckOptions& opts) {
  MlpParams work = params;
  ForwardCache cache;
  Matrix out = mlp_forward(work, x, cache);
  if (y.size() != out.rows()) throw ShapeError("finite_diff_check: label count mismatch");
  Matrix upstream(out.rows(), out.cols());
  if (work.output_activation == Activation::sigmoid && out.cols() == 1) {
    auto lr = bce_loss(out.flat(), y);
    upstream = Matrix(out.rows(), 1, lr.grad);
  } else {
    for (std::size_t r = 0; r < out.rows(); ++r)
      for (std::size_t c = 0; c < out.cols(); ++c) upstream(r, c) = out(r, c) - y[r];
  }
  const auto back = mlp_backward(work, cache, upstream, GradientAt::output);
  auto loss = [&] { return network_loss(work, x, y); };
  return compare_with_central_differences(loss, parameter_blocks(work),
                                          gradient_blocks(back.grads), opts);
}

}  // namespace blp
