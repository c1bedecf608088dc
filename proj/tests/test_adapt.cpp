#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "blp/adapt/triad.hpp"
#include "blp/data/synthetic.hpp"
#include "blp/env/accepted_set.hpp"
#include "blp/errors.hpp"
#include "blp/nn/gradcheck.hpp"
#include "test_util.hpp"

using namespace blp;

namespace {

TriadConfig small_config() {
  TriadConfig c;
  c.encoded_dim = 5;
  c.generator_hidden = {6};
  c.classifier_hidden = {4};
  c.discriminator_hidden = {4};
  return c;
}

Matrix shifted(const Matrix& m, std::size_t col, double by) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) out(r, col) += by;
  return out;
}

}  // namespace

TEST_SUITE("triad gradients") {
  TEST_CASE("generator + classifier gradients match central differences") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
      auto triad = make_triad(3, small_config(), seed);
      auto sx = testing::random_matrix(5, 3, seed + 10);
      auto tx = testing::random_matrix(4, 3, seed + 20);
      auto sy = testing::random_labels(5, seed + 30);
      auto g = generator_step_gradients(triad, sx, sy, tx);
      CHECK(g.loss == doctest::Approx(generator_objective(triad, sx, sy, tx)).epsilon(1e-12));

      auto params = parameter_blocks(triad.generator);
      auto cls = parameter_blocks(triad.classifier);
      params.insert(params.end(), cls.begin(), cls.end());
      auto analytic = gradient_blocks(g.generator);
      auto ca = gradient_blocks(g.classifier);
      analytic.insert(analytic.end(), ca.begin(), ca.end());
      const double err = compare_with_central_differences(
          [&] { return generator_objective(triad, sx, sy, tx); }, params, analytic);
      CHECK(err < 1e-4);
    }
  }

  TEST_CASE("discriminator gradients match central differences") {
    auto triad = make_triad(3, small_config(), 4);
    auto sx = testing::random_matrix(5, 3, 41);
    auto tx = testing::random_matrix(6, 3, 42);
    auto d = discriminator_step_gradients(triad, sx, tx);
    const double err = compare_with_central_differences(
        [&] { return discriminator_step_gradients(triad, sx, tx).loss; },
        parameter_blocks(triad.discriminator), gradient_blocks(d.discriminator));
    CHECK(err < 1e-4);
  }

  TEST_CASE("one discriminator step does not lower its objective") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto triad = make_triad(2, TriadConfig{}, seed);
      auto sx = testing::random_matrix(32, 2, seed + 1);
      auto tx = shifted(testing::random_matrix(32, 2, seed + 2), 1, 1.0);
      auto before = discriminator_step_gradients(triad, sx, tx);
      adam_step(triad.discriminator, before.discriminator, triad.discriminator_opt);
      auto after = discriminator_step_gradients(triad, sx, tx);
      // The objective D ascends is minus its BCE.
      CHECK(-after.loss >= -before.loss);
    }
  }
}

TEST_SUITE("adapt_train") {
  TEST_CASE("zero epochs leave the triad untouched") {
    auto triad = make_triad(2, TriadConfig{}, 5);
    const auto before = triad;
    DomainPair pair{testing::random_matrix(10, 2, 1), testing::random_labels(10, 2),
                    testing::random_matrix(8, 2, 3)};
    adapt_train(triad, pair, 0, 9);
    CHECK(triad == before);
  }

  TEST_CASE("empty source or target is a precondition error") {
    auto triad = make_triad(2, TriadConfig{}, 5);
    DomainPair no_s{Matrix(0, 2), {}, testing::random_matrix(4, 2, 1)};
    DomainPair no_t{testing::random_matrix(4, 2, 1), {1, 0, 1, 0}, Matrix(0, 2)};
    CHECK_THROWS_AS(adapt_train(triad, no_s, 1, 0), PreconditionError);
    CHECK_THROWS_AS(adapt_train(triad, no_t, 1, 0), PreconditionError);
  }

  TEST_CASE("deterministic for a fixed seed") {
    DomainPair pair{testing::random_matrix(50, 2, 1), testing::random_labels(50, 2),
                    testing::random_matrix(32, 2, 3)};
    auto a = make_triad(2, TriadConfig{}, 5), b = a;
    adapt_train(a, pair, 3, 77);
    adapt_train(b, pair, 3, 77);
    CHECK(a == b);
    CHECK(a.generator_opt.step_count == 3 * 2);
  }

  TEST_CASE("hidden target labels cannot reach the triad") {
    // Two batches with the same features but opposite hidden labels.
    Batch clean, poisoned;
    clean.step = poisoned.step = 2;
    auto x = testing::random_matrix(16, 2, 8);
    for (std::size_t i = 0; i < 16; ++i) {
      std::vector<double> f(x.row(i).begin(), x.row(i).end());
      clean.points.emplace_back(f, 1.0, std::nullopt, std::map<std::string, std::string>{}, i);
      poisoned.points.emplace_back(f, 0.0, std::nullopt, std::map<std::string, std::string>{}, i);
    }
    auto sx = testing::random_matrix(40, 2, 9);
    auto sy = testing::random_labels(40, 10);
    auto a = make_triad(2, TriadConfig{}, 11), b = a;
    adapt_train(a, make_domain_pair(sx, sy, clean.features(), 3200, 1), 4, 12);
    adapt_train(b, make_domain_pair(sx, sy, poisoned.features(), 3200, 1), 4, 12);
    CHECK(a == b);
    CHECK(debiased_predict(a, x) == debiased_predict(b, x));
  }

  TEST_CASE("identical domains leave the discriminator near chance") {
    Rng rng(13);
    auto draw = [&](std::size_t n) {
      Matrix m(n, 2);
      for (double& v : m.flat()) v = standard_normal(rng);
      return m;
    };
    auto triad = make_triad(2, TriadConfig{}, 14);
    DomainPair pair{draw(400), {}, draw(400)};
    for (std::size_t i = 0; i < 400; ++i) pair.source_y.push_back(pair.source_x(i, 0) > 0);
    adapt_train(triad, pair, 20, 15);
    DomainPair held{draw(500), std::vector<double>(500, 0.0), draw(500)};
    const double acc = diagnose(triad, held).discriminator_accuracy;
    CHECK(acc >= 0.40);
    CHECK(acc <= 0.60);
  }

  TEST_CASE("separable source labels survive adaptation") {
    DomainPair pair;
    std::vector<double> unused;
    testing::gaussian_blobs(200, 6.0, 16, pair.source_x, pair.source_y);
    testing::gaussian_blobs(64, 6.0, 17, pair.target_x, unused);
    auto triad = make_triad(2, TriadConfig{}, 18);
    adapt_train(triad, pair, 200, 19);
    CHECK(diagnose(triad, pair).classifier_source_accuracy >= 0.95);
  }
}

TEST_SUITE("debiased_predict") {
  TEST_CASE("zero triad predicts one half") {
    auto triad = make_zero_triad(3, TriadConfig{});
    for (double p : debiased_predict(triad, testing::random_matrix(7, 3, 1))) CHECK(p == 0.5);
    CHECK(parity_gap(triad, testing::random_matrix(3, 3, 2), testing::random_matrix(4, 3, 3)) == 0.0);
  }

  TEST_CASE("memorizes a single positive source point") {
    auto triad = make_triad(2, TriadConfig{}, 20);
    DomainPair pair{Matrix::from_rows({{0.5, -1.0}}), {1.0}, Matrix::from_rows({{0.4, -0.9}})};
    adapt_train(triad, pair, 400, 21);
    CHECK(debiased_predict(triad, pair.source_x)[0] > 0.9);
  }

  TEST_CASE("pointwise under permutation") {
    auto triad = make_triad(2, TriadConfig{}, 22);
    auto x = testing::random_matrix(9, 2, 23);
    std::vector<std::size_t> perm = {4, 2, 8, 0, 1, 7, 3, 6, 5};
    auto p = debiased_predict(triad, x);
    auto q = debiased_predict(triad, x.select_rows(perm));
    for (std::size_t i = 0; i < perm.size(); ++i) CHECK(q[i] == p[perm[i]]);
  }

  TEST_CASE("shape mismatch") {
    auto triad = make_triad(2, TriadConfig{}, 22);
    CHECK_THROWS_AS(debiased_predict(triad, testing::random_matrix(2, 3, 1)), ShapeError);
  }
}

TEST_SUITE("parity_gap") {
  TEST_CASE("identical sets") {
    auto triad = make_triad(2, TriadConfig{}, 24);
    auto x = testing::random_matrix(30, 2, 25);
    CHECK(parity_gap(triad, x, x) == 0.0);
  }

  TEST_CASE("predicted-positive rates 0.69 and 0.66") {
    std::vector<double> s(100, 0.2), t(100, 0.2);
    std::fill(s.begin(), s.begin() + 69, 0.8);
    std::fill(t.begin(), t.begin() + 66, 0.8);
    CHECK(parity_gap(s, t) == doctest::Approx(0.03));
  }

  TEST_CASE("constant all-positive classifier") {
    std::vector<double> s(10, 0.9), t(25, 0.51);
    CHECK(parity_gap(s, t) == 0.0);
  }
}

TEST_SUITE("positive_rate_divergence") {
  const OracleAccess oracle = OracleAccess::grant();

  TEST_CASE("all-positive accepted vs half-positive population") {
    std::vector<double> a(10, 1.0), pop{1, 0, 1, 0};
    auto [ra, rp] = positive_rate_divergence(a, pop, oracle);
    CHECK(ra == 1.0);
    CHECK(rp == 0.5);
    CHECK_THROWS_AS(positive_rate_divergence({}, pop, oracle), PreconditionError);
  }

  TEST_CASE("accept-all first batch tracks the population") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto ds = make_synthetic({.n = 20000, .dim = 2, .theta = {1.0, -1.0}, .seed = seed});
      std::vector<double> first(ds.y.begin(), ds.y.begin() + 1024);
      auto [ra, rp] = positive_rate_divergence(first, ds.y, oracle);
      CHECK(std::abs(ra - rp) < 0.1);
    }
  }
}

TEST_CASE("domain pair caps the source at a uniform sample") {
  const std::size_t n = 5000;
  Matrix ax(n, 1);
  std::vector<double> ay(n);
  for (std::size_t i = 0; i < n; ++i) {
    ax(i, 0) = static_cast<double>(i);
    ay[i] = i % 2;
  }
  auto pair = make_domain_pair(ax, ay, Matrix(4, 1), 3200, 1);
  CHECK(pair.source_x.rows() == 3200);
  std::vector<double> vals(pair.source_x.flat().begin(), pair.source_x.flat().end());
  CHECK(std::adjacent_find(vals.begin(), vals.end()) == vals.end());
  for (std::size_t i = 0; i < 3200; ++i)
    CHECK(pair.source_y[i] == static_cast<double>(static_cast<std::size_t>(vals[i]) % 2));
  const double m = std::accumulate(vals.begin(), vals.end(), 0.0) / 3200.0;
  CHECK(std::abs(m - 2499.5) < 100.0);
  CHECK(make_domain_pair(ax, ay, Matrix(4, 1), 3200, 1).source_x == pair.source_x);
  CHECK(make_domain_pair(ax, ay, Matrix(4, 1), 6000, 1).source_x.rows() == n);
}
