#include "doctest.h"

#include <cmath>
#include <sstream>

#include "blp/nn/adam.hpp"
#include "blp/nn/gradcheck.hpp"
#include "blp/nn/loss.hpp"
#include "blp/nn/mlp.hpp"
#include "blp/nn/train.hpp"
#include "blp/nn/weights_io.hpp"
#include "test_util.hpp"

using namespace blp;
using blp::testing::random_labels;
using blp::testing::random_matrix;

namespace {

// Scalar step-through evaluation, written without the kernels or the Matrix
// row helpers, used as the oracle for mlp_forward.
double step_through(const MlpParams& p, const std::vector<double>& x) {
  std::vector<double> a = x;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const std::size_t in = p.layer_sizes[l], out = p.layer_sizes[l + 1];
    std::vector<double> z(out);
    for (std::size_t j = 0; j < out; ++j) {
      z[j] = p.biases[l][j];
      for (std::size_t k = 0; k < in; ++k) z[j] += a[k] * p.weights[l].values()[k * out + j];
    }
    const bool last = l + 1 == p.weights.size();
    for (double& v : z) v = last ? 1.0 / (1.0 + std::exp(-v)) : std::max(0.0, v);
    a = z;
  }
  return a[0];
}

// Scalar Adam written out from the update equations.
struct ScalarAdam {
  double m = 0, v = 0, theta, lr, b1, b2, eps = 1e-8;
  int t = 0;
  void step(double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    double mh = m / (1 - std::pow(b1, t));
    double vh = v / (1 - std::pow(b2, t));
    theta -= lr * mh / (std::sqrt(vh) + eps);
  }
};

MlpParams scalar_net(double w, double b, Activation out = Activation::sigmoid) {
  MlpParams p = make_zero_mlp({1, 1}, out);
  p.weights[0](0, 0) = w;
  p.biases[0][0] = b;
  return p;
}

}  // namespace

TEST_SUITE("mlp_forward") {
  TEST_CASE("all-zero sigmoid network outputs one half") {
    MlpParams p = make_zero_mlp({3, 4, 1}, Activation::sigmoid);
    Matrix x = random_matrix(5, 3, 9);
    for (double v : mlp_predict(p, x)) CHECK(v == 0.5);
  }

  TEST_CASE("1-1 net with bias ln 3 gives 3/4") {
    MlpParams p = scalar_net(0.0, std::log(3.0));
    CHECK(mlp_predict(p, Matrix::from_rows({{0.0}}))[0] == doctest::Approx(0.75).epsilon(1e-15));
  }

  TEST_CASE("2-2-1 net matches a scalar step-through") {
    MlpParams p = make_mlp({2, 2, 1}, Activation::sigmoid, 17);
    p.biases[0] = {0.3, -0.1};
    p.biases[1] = {0.2};
    const std::vector<std::vector<double>> xs{{0.5, -1.5}, {2.0, 1.0}, {-0.7, 0.1}};
    for (const auto& x : xs) {
      Matrix xm(1, 2, x);
      CHECK(mlp_predict(p, xm)[0] == doctest::Approx(step_through(p, x)).epsilon(1e-14));
    }
  }

  TEST_CASE("shape mismatch throws") {
    MlpParams p = make_mlp({3, 2, 1}, Activation::sigmoid, 1);
    CHECK_THROWS_AS(mlp_forward(p, Matrix(2, 4)), ShapeError);
  }

  TEST_CASE("sigmoid head stays strictly inside (0,1)") {
    MlpParams p = scalar_net(1.0, 0.0);
    Matrix x = Matrix::from_rows({{-1e4}, {-800.0}, {40.0}, {800.0}, {1e4}});
    for (double v : mlp_predict(p, x)) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_SUITE("bce_loss") {
  TEST_CASE("reference values") {
    std::vector<double> p{0.5}, y{1.0};
    CHECK(bce_loss(p, y).loss == doctest::Approx(std::log(2.0)));
    p = {1.0 - 1e-7};
    CHECK(bce_loss(p, y).loss <= 1.1e-7);
    p = {0.8};
    y = {0.0};
    CHECK(bce_loss(p, y).loss == doctest::Approx(1.6094379124341003));
  }

  TEST_CASE("clipping keeps the loss finite at 0 and 1") {
    std::vector<double> p{0.0, 1.0}, y{1.0, 0.0};
    auto r = bce_loss(p, y);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(-2.0 * std::log(1e-7)));
  }

  TEST_CASE("weights scale each term and gradient matches the sum") {
    std::vector<double> p{0.3, 0.9}, y{1.0, 0.0}, w{2.0, 0.5};
    auto r = bce_loss(p, y, w);
    CHECK(r.loss == doctest::Approx(-2.0 * std::log(0.3) - 0.5 * std::log(0.1)));
    const double h = 1e-6;
    for (std::size_t i = 0; i < 2; ++i) {
      auto pu = p, pd = p;
      pu[i] += h;
      pd[i] -= h;
      const double fd = (bce_loss(pu, y, w).loss - bce_loss(pd, y, w).loss) / (2 * h);
      CHECK(r.grad[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("length mismatch throws") {
    std::vector<double> p{0.5, 0.5}, y{1.0};
    CHECK_THROWS_AS(bce_loss(p, y), ShapeError);
  }
}

TEST_SUITE("mlp_backward") {
  TEST_CASE("zero upstream gives zero gradients") {
    MlpParams p = make_mlp({3, 6, 1}, Activation::sigmoid, 3);
    Matrix x = random_matrix(4, 3, 4);
    auto r = mlp_backward(p, x, Matrix(4, 1));
    for (const auto& w : r.grads.weights)
      for (double v : w.flat()) CHECK(v == 0.0);
    for (const auto& b : r.grads.biases)
      for (double v : b) CHECK(v == 0.0);
  }

  TEST_CASE("single linear neuron with squared error") {
    const double w = 0.7, b = -0.2, x = 1.5, y = 2.0;
    MlpParams p = scalar_net(w, b, Activation::identity);
    Matrix xm = Matrix::from_rows({{x}});
    const double out = mlp_predict(p, xm)[0];
    // d/dout (out - y)^2
    auto r = mlp_backward(p, xm, Matrix::from_rows({{2.0 * (out - y)}}));
    CHECK(r.grads.weights[0](0, 0) == doctest::Approx(2.0 * (w * x + b - y) * x));
    CHECK(r.grads.biases[0][0] == doctest::Approx(2.0 * (w * x + b - y)));
    CHECK(r.input_grad(0, 0) == doctest::Approx(2.0 * (w * x + b - y) * w));
  }

  TEST_CASE("random two-layer nets agree with central differences") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      MlpParams p = make_mlp({4, 7, 1}, Activation::sigmoid, 100 + seed);
      Matrix x = random_matrix(6, 4, 200 + seed);
      auto y = random_labels(6, 300 + seed);
      CHECK(finite_diff_check(p, x, y) < 1e-4);
    }
  }

  TEST_CASE("logit upstream skips the sigmoid derivative") {
    MlpParams p = make_mlp({2, 3, 1}, Activation::sigmoid, 5);
    Matrix x = random_matrix(3, 2, 6);
    ForwardCache cache;
    Matrix out = mlp_forward(p, x, cache);
    Matrix up_p(3, 1), up_z(3, 1);
    for (std::size_t r = 0; r < 3; ++r) {
      up_z(r, 0) = 0.3 * (r + 1.0);
      up_p(r, 0) = up_z(r, 0) / (out(r, 0) * (1.0 - out(r, 0)));
    }
    auto a = mlp_backward(p, cache, up_p, GradientAt::output);
    auto b = mlp_backward(p, cache, up_z, GradientAt::logits);
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t i = 0; i < a.grads.weights[l].size(); ++i)
        CHECK(a.grads.weights[l].flat()[i] == doctest::Approx(b.grads.weights[l].flat()[i]));
  }
}

TEST_SUITE("finite_diff_check") {
  TEST_CASE("3-5-1 nets, seeds 0..2") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      MlpParams p = make_mlp({3, 5, 1}, Activation::sigmoid, seed);
      Matrix x = random_matrix(8, 3, 50 + seed);
      auto y = random_labels(8, 70 + seed);
      CHECK(finite_diff_check(p, x, y) < 1e-4);
    }
  }

  TEST_CASE("linear 1-1 net is near exact") {
    MlpParams p = scalar_net(0.4, 0.1, Activation::identity);
    Matrix x = Matrix::from_rows({{1.0}, {-2.0}, {0.5}});
    std::vector<double> y{0.3, 0.2, -1.0};
    CHECK(finite_diff_check(p, x, y) < 1e-7);
  }

  TEST_CASE("dead ReLU parameters are skipped") {
    MlpParams p = make_mlp({2, 3, 1}, Activation::sigmoid, 8);
    // Hidden unit 1 never activates for positive inputs.
    p.weights[0](0, 1) = -5.0;
    p.weights[0](1, 1) = -5.0;
    p.biases[0][1] = -1.0;
    Matrix x = Matrix::from_rows({{1.0, 0.5}, {0.2, 2.0}});
    std::vector<double> y{1.0, 0.0};
    ForwardCache cache;
    Matrix out = mlp_forward(p, x, cache);
    auto back = mlp_backward(p, cache, Matrix(2, 1, bce_loss(out.flat(), y).grad));
    CHECK(back.grads.weights[0](0, 1) == 0.0);
    CHECK(back.grads.weights[1](1, 0) == 0.0);
    CHECK(finite_diff_check(p, x, y) < 1e-4);
  }

  TEST_CASE("a wrong gradient is detected") {
    MlpParams p = make_mlp({2, 2, 1}, Activation::sigmoid, 2);
    MlpParams work = p;
    Matrix x = random_matrix(3, 2, 3);
    auto y = random_labels(3, 4);
    auto loss = [&] { return network_loss(work, x, y); };
    MlpGrads wrong = MlpGrads::zeros_like(p);
    wrong.biases[1][0] = 123.0;
    CHECK(compare_with_central_differences(loss, parameter_blocks(work), gradient_blocks(wrong)) > 1.0);
  }
}

TEST_SUITE("adam_step") {
  TEST_CASE("zero gradients never move parameters") {
    MlpParams p = make_mlp({3, 4, 1}, Activation::sigmoid, 11);
    const MlpParams before = p;
    AdamState s = AdamState::for_params(p, {1e-2, 0.9, 0.999, 1e-8});
    MlpGrads g = MlpGrads::zeros_like(p);
    for (int i = 0; i < 5; ++i) adam_step(p, g, s);
    CHECK(p == before);
    CHECK(s.step_count == 5);
  }

  TEST_CASE("first step with beta=(0,0.99) moves by the learning rate") {
    MlpParams p = scalar_net(0.0, 0.0, Activation::identity);
    AdamState s = AdamState::for_params(p, {1e-4, 0.0, 0.99, 1e-8});
    MlpGrads g = MlpGrads::zeros_like(p);
    g.weights[0](0, 0) = 1.0;
    adam_step(p, g, s);
    CHECK(std::abs(p.weights[0](0, 0) - (-1e-4)) < 1e-10);
  }

  TEST_CASE("trajectory matches a scalar reference") {
    for (auto [b1, b2] : {std::pair{0.0, 0.99}, std::pair{0.9, 0.999}}) {
      MlpParams p = scalar_net(0.5, 0.0, Activation::identity);
      AdamState s = AdamState::for_params(p, {1e-3, b1, b2, 1e-8});
      ScalarAdam ref{.theta = 0.5, .lr = 1e-3, .b1 = b1, .b2 = b2};
      MlpGrads g = MlpGrads::zeros_like(p);
      for (double gv : {0.37, 0.37, -1.2}) {
        g.weights[0](0, 0) = gv;
        adam_step(p, g, s);
        ref.step(gv);
        CHECK(p.weights[0](0, 0) == doctest::Approx(ref.theta).epsilon(1e-14));
        CHECK(s.m.weights[0](0, 0) == doctest::Approx(ref.m).epsilon(1e-14));
        CHECK(s.v.weights[0](0, 0) == doctest::Approx(ref.v).epsilon(1e-14));
        CHECK(s.v.weights[0](0, 0) >= 0.0);
      }
    }
  }

  TEST_CASE("non-finite gradient throws and leaves state untouched") {
    MlpParams p = make_mlp({2, 2, 1}, Activation::sigmoid, 1);
    AdamState s = AdamState::for_params(p);
    const MlpParams before = p;
    const AdamState s_before = s;
    MlpGrads g = MlpGrads::zeros_like(p);
    g.weights[1](0, 0) = std::nan("");
    CHECK_THROWS_AS(adam_step(p, g, s), NumericError);
    CHECK(p == before);
    CHECK(s == s_before);
  }
}

TEST_SUITE("train_supervised") {
  TEST_CASE("memorises a single positive point") {
    MlpParams p = make_mlp({2, 8, 1}, Activation::sigmoid, 4);
    AdamState s = AdamState::for_params(p, {1e-2});
    Matrix x = Matrix::from_rows({{0.3, -0.8}});
    std::vector<double> y{1.0};
    train_supervised(p, s, x, y, {.epochs = 500, .batch_size = 1, .seed = 1});
    CHECK(mlp_predict(p, x)[0] > 0.99);
  }

  TEST_CASE("XOR on a 2-8-1 net") {
    Matrix x = Matrix::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    std::vector<double> y{0, 1, 1, 0};
    MlpParams p = make_mlp({2, 8, 1}, Activation::sigmoid, 21);
    AdamState s = AdamState::for_params(p, {1e-2});
    train_supervised(p, s, x, y, {.epochs = 2000, .batch_size = 4, .seed = 2});
    CHECK(accuracy(p, x, y) == 1.0);
  }

  TEST_CASE("blobs 6 sigma apart: held-out accuracy and training loss") {
    Matrix xtr, xte;
    std::vector<double> ytr, yte;
    blp::testing::gaussian_blobs(400, 6.0, 31, xtr, ytr);
    blp::testing::gaussian_blobs(2000, 6.0, 32, xte, yte);
    MlpParams p = make_mlp({2, 40, 40, 1}, Activation::sigmoid, 5);
    AdamState s = AdamState::for_params(p);
    auto rep = train_supervised(p, s, xtr, ytr, {.epochs = 200, .batch_size = 32, .seed = 3});
    CHECK(rep.epoch_losses.back() < 0.1);
    CHECK(rep.epoch_losses.back() < rep.epoch_losses.front());
    CHECK(accuracy(p, xte, yte) >= 0.99);
  }

  TEST_CASE("identical seeds give bit-identical parameters") {
    Matrix x = random_matrix(50, 3, 8);
    auto y = random_labels(50, 9);
    auto run = [&] {
      MlpParams p = make_mlp({3, 10, 1}, Activation::sigmoid, 6);
      AdamState s = AdamState::for_params(p);
      train_supervised(p, s, x, y, {.epochs = 5, .batch_size = 8, .seed = 77});
      return p;
    };
    CHECK(run() == run());
  }

  TEST_CASE("empty dataset is a precondition error") {
    MlpParams p = make_mlp({3, 2, 1}, Activation::sigmoid, 6);
    AdamState s = AdamState::for_params(p);
    CHECK_THROWS_AS(train_supervised(p, s, Matrix(0, 3), {}, {}), PreconditionError);
  }
}

TEST_CASE("weight dump round-trips and starts with the layer sizes") {
  MlpParams p = make_mlp({3, 4, 1}, Activation::sigmoid, 2);
  std::stringstream buf;
  save_weights(buf, p);
  const std::string bytes = buf.str();
  CHECK(bytes.size() == 8 * (1 + 3 + p.parameter_count()));
  CHECK(static_cast<unsigned char>(bytes[0]) == 3);
  CHECK(static_cast<unsigned char>(bytes[8]) == 3);
  CHECK(static_cast<unsigned char>(bytes[16]) == 4);
  CHECK(load_weights(buf, Activation::sigmoid) == p);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_weights(truncated, Activation::sigmoid), DataError);
}
