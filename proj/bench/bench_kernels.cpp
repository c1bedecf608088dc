// Serial reference kernels vs the OpenMP kernels, on the layer shapes the
// policies actually use: the 40-wide biased model and the 100-wide triad.
#include <benchmark/benchmark.h>

#include "blp/nn/kernels.hpp"
#include "blp/nn/mlp.hpp"
#include "blp/rng.hpp"

namespace {

blp::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  blp::Rng rng(seed);
  blp::Matrix m(r, c);
  for (double& v : m.flat()) v = blp::standard_normal(rng);
  return m;
}

template <bool Omp>
void BM_affine_forward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  auto x = random_matrix(n, width, 1);
  auto w = random_matrix(width, width, 2);
  std::vector<double> b(width, 0.1);
  blp::Matrix y;
  for (auto _ : state) {
    if constexpr (Omp)
      blp::kernels::omp::affine_forward(x, w, b, y);
    else
      blp::kernels::serial::affine_forward(x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * width * width));
}

template <bool Omp>
void BM_backprop_input(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  auto dy = random_matrix(n, width, 3);
  auto w = random_matrix(width, width, 4);
  blp::Matrix dx;
  for (auto _ : state) {
    if constexpr (Omp)
      blp::kernels::omp::backprop_input(dy, w, dx);
    else
      blp::kernels::serial::backprop_input(dy, w, dx);
    benchmark::DoNotOptimize(dx.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * width * width));
}

template <bool Omp>
void BM_weight_grad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  auto x = random_matrix(n, width, 5);
  auto dy = random_matrix(n, width, 6);
  blp::Matrix dw(width, width);
  std::vector<double> db(width);
  for (auto _ : state) {
    if constexpr (Omp)
      blp::kernels::omp::accumulate_weight_grad(x, dy, dw, db);
    else
      blp::kernels::serial::accumulate_weight_grad(x, dy, dw, db);
    benchmark::DoNotOptimize(dw.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * width * width));
}

// Whole forward/backward pass of the triad generator on a 64-row mini-batch.
void BM_generator_pass(benchmark::State& state) {
  auto gen = blp::make_mlp({10, 100, 100, 100}, blp::Activation::identity, 7);
  auto x = random_matrix(64, 10, 8);
  blp::ForwardCache cache;
  for (auto _ : state) {
    auto out = blp::mlp_forward(gen, x, cache);
    auto back = blp::mlp_backward(gen, cache, out);
    benchmark::DoNotOptimize(back.grads.weights[0].data());
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({32, 40})->Args({64, 100})->Args({512, 100})->Args({3200, 100});
}

}  // namespace

BENCHMARK(BM_affine_forward<false>)->Name("affine_forward/serial")->Apply(shapes);
BENCHMARK(BM_affine_forward<true>)->Name("affine_forward/omp")->Apply(shapes);
BENCHMARK(BM_backprop_input<false>)->Name("backprop_input/serial")->Apply(shapes);
BENCHMARK(BM_backprop_input<true>)->Name("backprop_input/omp")->Apply(shapes);
BENCHMARK(BM_weight_grad<false>)->Name("weight_grad/serial")->Apply(shapes);
BENCHMARK(BM_weight_grad<true>)->Name("weight_grad/omp")->Apply(shapes);
BENCHMARK(BM_generator_pass);

BENCHMARK_MAIN();
