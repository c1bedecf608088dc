#include "blp/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blp/errors.hpp"

namespace blp {

double sigmoid(double z) {
  // Clamped so a sigmoid head never returns exactly 0 or 1.
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(s, lo, hi);
}

namespace {
void check_lengths(std::span<const double> p, std::span<const double> y,
                   std::span<const double> w) {
  if (p.size() != y.size()) throw ShapeError("bce: prediction/label length mismatch");
  if (!w.empty() && w.size() != p.size()) throw ShapeError("bce: weight length mismatch");
}
}  // namespace

LossResult bce_loss(std::span<const double> p, std::span<const double> y,
                    std::span<const double> weights) {
  check_lengths(p, y, weights);
  LossResult r;
  r.grad.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double pc = std::clamp(p[i], kProbClip, 1.0 - kProbClip);
    r.loss += w * (-y[i] * std::log(pc) - (1.0 - y[i]) * std::log(1.0 - pc));
    r.grad[i] = w * (-y[i] / pc + (1.0 - y[i]) / (1.0 - pc));
  }
  return r;
}

std::vector<double> bce_logit_grad(std::span<const double> p, std::span<const double> y,
                                   std::span<const double> weights, double scale) {
  check_lengths(p, y, weights);
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    g[i] = scale * w * (p[i] - y[i]);
  }
  return g;
}

}  // namespace blp
