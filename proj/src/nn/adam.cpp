#include "blp/nn/adam.hpp"

#include <cmath>

#include "blp/errors.hpp"

namespace blp {

AdamState AdamState::for_params(const MlpParams& p, const AdamConfig& cfg) {
  AdamState s;
  s.m = MlpGrads::zeros_like(p);
  s.v = MlpGrads::zeros_like(p);
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  s.epsilon = cfg.epsilon;
  s.learning_rate = cfg.learning_rate;
  return s;
}

void AdamState::reset() {
  m.set_zero();
  v.set_zero();
  step_count = 0;
}

namespace {
void update_block(std::span<double> theta, std::span<const double> g, std::span<double> m,
                  std::span<double> v, const AdamState& s, double bc1, double bc2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    theta[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
  }
}
}  // namespace

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  if (grads.weights.size() != params.weights.size() ||
      state.m.weights.size() != params.weights.size())
    throw ShapeError("adam_step: gradient/state depth mismatch");
  for (std::size_t i = 0; i < params.weights.size(); ++i)
    if (grads.weights[i].rows() != params.weights[i].rows() ||
        grads.weights[i].cols() != params.weights[i].cols() ||
        grads.biases[i].size() != params.biases[i].size())
      throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(i));
  if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient");

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    update_block(params.weights[i].flat(), grads.weights[i].flat(), state.m.weights[i].flat(),
                 state.v.weights[i].flat(), state, bc1, bc2);
    update_block(params.biases[i], grads.biases[i], state.m.biases[i], state.v.biases[i], state,
                 bc1, bc2);
  }
}

}  // namespace blp
