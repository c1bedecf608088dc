#include "blp/nn/train.hpp"

#include <algorithm>
#include <numeric>

#include "blp/errors.hpp"
#include "blp/nn/loss.hpp"
#include "blp/rng.hpp"

namespace blp {

TrainReport train_supervised(MlpParams& params, AdamState& state, const Matrix& x,
                             std::span<const double> y, const TrainOptions& opts) {
  if (x.rows() == 0) throw PreconditionError("train_supervised: empty dataset");
  if (y.size() != x.rows()) throw ShapeError("train_supervised: label count mismatch");
  if (params.output_dim() != 1) throw ShapeError("train_supervised: expects a single output");
  const std::size_t n = x.rows();
  const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);

  Rng rng(opts.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  TrainReport report;
  ForwardCache cache;
  std::vector<std::size_t> idx;
  std::vector<double> yb;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t end = std::min(n, start + bs);
      idx.assign(order.begin() + start, order.begin() + end);
      yb.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = y[idx[i]];
      Matrix xb = x.select_rows(idx);
      Matrix out = mlp_forward(params, xb, cache);
      total += bce_loss(out.flat(), yb).loss;
      const double scale = 1.0 / static_cast<double>(idx.size());
      Matrix up(idx.size(), 1, bce_logit_grad(out.flat(), yb, {}, scale));
      auto back = mlp_backward(params, cache, up, GradientAt::logits);
      adam_step(params, back.grads, state);
    }
    report.epoch_losses.push_back(total / static_cast<double>(n));
  }
  return report;
}

double accuracy(const MlpParams& params, const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0) return 0.0;
  auto p = mlp_predict(params, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    correct += ((p[i] >= 0.5) == (y[i] >= 0.5)) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(p.size());
}

}  // namespace blp
