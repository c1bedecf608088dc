#include "blp/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blp/nn/kernels.hpp"
#include "blp/nn/loss.hpp"
#include "blp/rng.hpp"

namespace blp {

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
  return n;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
  MlpGrads g;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    g.weights.emplace_back(p.weights[i].rows(), p.weights[i].cols());
    g.biases.emplace_back(p.biases[i].size(), 0.0);
  }
  return g;
}

void MlpGrads::set_zero() {
  for (auto& w : weights) w.fill(0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

bool MlpGrads::all_finite() const {
  for (const auto& w : weights)
    if (!w.all_finite()) return false;
  for (const auto& b : biases)
    for (double v : b)
      if (!std::isfinite(v)) return false;
  return true;
}

void MlpGrads::add_scaled(const MlpGrads& other, double scale) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto dst = weights[i].flat();
    auto src = other.weights[i].flat();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
    for (std::size_t k = 0; k < biases[i].size(); ++k) biases[i][k] += scale * other.biases[i][k];
  }
}

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw ShapeError("an MLP needs at least input and output sizes");
  for (auto s : sizes)
    if (s == 0) throw ShapeError("MLP layer sizes must be positive");
}

void apply_activation(Activation a, const Matrix& pre, Matrix& post) {
  post = pre;
  auto v = post.flat();
  switch (a) {
    case Activation::relu:
      for (double& e : v) e = e > 0.0 ? e : 0.0;
      break;
    case Activation::sigmoid:
      for (double& e : v) e = sigmoid(e);
      break;
    case Activation::identity:
      break;
  }
}

// Multiplies grad in place by the activation's derivative.
void apply_activation_grad(Activation a, const Matrix& pre, const Matrix& post, Matrix& grad) {
  auto g = grad.flat();
  switch (a) {
    case Activation::relu: {
      auto z = pre.flat();
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(z[i] > 0.0)) g[i] = 0.0;
      break;
    }
    case Activation::sigmoid: {
      auto p = post.flat();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= p[i] * (1.0 - p[i]);
      break;
    }
    case Activation::identity:
      break;
  }
}

}  // namespace

MlpParams make_zero_mlp(std::vector<std::size_t> layer_sizes, Activation output_activation) {
  check_sizes(layer_sizes);
  MlpParams p;
  p.layer_sizes = std::move(layer_sizes);
  p.output_activation = output_activation;
  for (std::size_t i = 0; i + 1 < p.layer_sizes.size(); ++i) {
    p.weights.emplace_back(p.layer_sizes[i], p.layer_sizes[i + 1]);
    p.biases.emplace_back(p.layer_sizes[i + 1], 0.0);
  }
  return p;
}

MlpParams make_mlp(std::vector<std::size_t> layer_sizes, Activation output_activation,
                   std::uint64_t seed) {
  MlpParams p = make_zero_mlp(std::move(layer_sizes), output_activation);
  Rng rng(seed);
  for (auto& w : p.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& e : w.flat()) e = dist(rng);
  }
  return p;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& x, ForwardCache& cache) {
  if (x.cols() != params.input_dim())
    throw ShapeError("mlp_forward: input width " + std::to_string(x.cols()) +
                     " != network input " + std::to_string(params.input_dim()));
  const std::size_t L = params.layer_count();
  cache.pre.resize(L);
  cache.post.resize(L + 1);
  cache.post[0] = x;
  for (std::size_t i = 0; i < L; ++i) {
    kernels::affine_forward(cache.post[i], params.weights[i], params.biases[i], cache.pre[i]);
    const Activation a = i + 1 == L ? params.output_activation : params.hidden_activation;
    apply_activation(a, cache.pre[i], cache.post[i + 1]);
  }
  return cache.post.back();
}

Matrix mlp_forward(const MlpParams& params, const Matrix& x) {
  ForwardCache cache;
  return mlp_forward(params, x, cache);
}

std::vector<double> mlp_predict(const MlpParams& params, const Matrix& x) {
  Matrix out = mlp_forward(params, x);
  std::vector<double> p(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) p[r] = out(r, 0);
  return p;
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& upstream, GradientAt at) {
  const std::size_t L = params.layer_count();
  if (cache.post.size() != L + 1 || cache.pre.size() != L)
    throw ShapeError("mlp_backward: forward cache does not match network depth");
  const Matrix& out = cache.post.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols())
    throw ShapeError("mlp_backward: upstream gradient shape mismatch");

  BackwardResult res{MlpGrads::zeros_like(params), {}};
  Matrix delta = upstream;
  if (at == GradientAt::output)
    apply_activation_grad(params.output_activation, cache.pre[L - 1], cache.post[L], delta);
  for (std::size_t i = L; i-- > 0;) {
    kernels::accumulate_weight_grad(cache.post[i], delta, res.grads.weights[i],
                                    res.grads.biases[i]);
    Matrix below;
    kernels::backprop_input(delta, params.weights[i], below);
    if (i > 0) apply_activation_grad(params.hidden_activation, cache.pre[i - 1], cache.post[i], below);
    delta = std::move(below);
  }
  res.input_grad = std::move(delta);
  return res;
}

BackwardResult mlp_backward(const MlpParams& params, const Matrix& x, const Matrix& upstream,
                            GradientAt at) {
  ForwardCache cache;
  mlp_forward(params, x, cache);
  return mlp_backward(params, cache, upstream, at);
}

std::vector<std::span<double>> parameter_blocks(MlpParams& p) {
  std::vector<std::span<double>> blocks;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    blocks.push_back(p.weights[i].flat());
    blocks.push_back(p.biases[i]);
  }
  return blocks;
}

std::vector<std::span<const double>> gradient_blocks(const MlpGrads& g) {
  std::vector<std::span<const double>> blocks;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    blocks.push_back(g.weights[i].flat());
    blocks.push_back(g.biases[i]);
  }
  return blocks;
}

}  // namespace blp
