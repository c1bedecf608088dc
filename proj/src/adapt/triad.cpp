#include "blp/adapt/triad.hpp"

#include <algorithm>
#include <numeric>

#include "blp/errors.hpp"
#include "blp/nn/loss.hpp"
#include "blp/rng.hpp"

namespace blp {

namespace {

std::vector<std::size_t> sizes(std::size_t in, const std::vector<std::size_t>& hidden,
                               std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

AdamConfig adam_config(const TriadConfig& c, double lr) {
  return {.learning_rate = lr, .beta1 = c.beta1, .beta2 = c.beta2};
}

void init_optimizers(AdversarialTriad& t) {
  const auto& c = t.config;
  t.generator_opt = AdamState::for_params(t.generator, adam_config(c, c.lr_generator));
  t.classifier_opt = AdamState::for_params(t.classifier, adam_config(c, c.lr_classifier));
  t.discriminator_opt = AdamState::for_params(t.discriminator, adam_config(c, c.lr_discriminator));
}

// Row-wise concatenation, source rows first.
Matrix stack(const Matrix& a, const Matrix& b) { return vstack(a, b); }

std::vector<double> domain_labels(std::size_t n_source, std::size_t n_target) {
  std::vector<double> y(n_source + n_target, 1.0);
  std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_source), 0.0);
  return y;
}

}  // namespace

AdversarialTriad make_triad(std::size_t input_dim, const TriadConfig& config, std::uint64_t seed) {
  AdversarialTriad t;
  t.config = config;
  t.generator = make_mlp(sizes(input_dim, config.generator_hidden, config.encoded_dim),
                         Activation::identity, derive_seed(seed, {"generator"}));
  t.classifier = make_mlp(sizes(config.encoded_dim, config.classifier_hidden, 1),
                          Activation::sigmoid, derive_seed(seed, {"classifier"}));
  t.discriminator = make_mlp(sizes(config.encoded_dim, config.discriminator_hidden, 1),
                             Activation::sigmoid, derive_seed(seed, {"discriminator"}));
  init_optimizers(t);
  return t;
}

AdversarialTriad make_zero_triad(std::size_t input_dim, const TriadConfig& config) {
  AdversarialTriad t;
  t.config = config;
  t.generator = make_zero_mlp(sizes(input_dim, config.generator_hidden, config.encoded_dim),
                              Activation::identity);
  t.classifier =
      make_zero_mlp(sizes(config.encoded_dim, config.classifier_hidden, 1), Activation::sigmoid);
  t.discriminator =
      make_zero_mlp(sizes(config.encoded_dim, config.discriminator_hidden, 1), Activation::sigmoid);
  init_optimizers(t);
  return t;
}

void reset_optimizers(AdversarialTriad& triad) { init_optimizers(triad); }

DomainPair make_domain_pair(const Matrix& accepted_x, std::span<const double> accepted_y,
                            const Matrix& batch_x, std::size_t cap, std::uint64_t seed) {
  if (accepted_x.rows() != accepted_y.size()) throw ShapeError("domain pair: label count");
  DomainPair pair;
  pair.target_x = batch_x;
  const std::size_t n = accepted_x.rows();
  if (cap == 0 || n <= cap) {
    pair.source_x = accepted_x;
    pair.source_y.assign(accepted_y.begin(), accepted_y.end());
    return pair;
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first `cap` slots are a uniform sample.
  for (std::size_t i = 0; i < cap; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  pair.source_x = accepted_x.select_rows(idx);
  for (std::size_t i : idx) pair.source_y.push_back(accepted_y[i]);
  return pair;
}

DiscriminatorStep discriminator_step_gradients(const AdversarialTriad& triad, const Matrix& source_x,
                                               const Matrix& target_x) {
  const Matrix z = stack(mlp_forward(triad.generator, source_x), mlp_forward(triad.generator, target_x));
  const auto dy = domain_labels(source_x.rows(), target_x.rows());
  ForwardCache cache;
  Matrix p = mlp_forward(triad.discriminator, z, cache);
  const double scale = 1.0 / static_cast<double>(dy.size());
  DiscriminatorStep step;
  step.loss = bce_loss(p.flat(), dy).loss * scale;
  Matrix up(dy.size(), 1, bce_logit_grad(p.flat(), dy, {}, scale));
  step.discriminator = mlp_backward(triad.discriminator, cache, up, GradientAt::logits).grads;
  return step;
}

GeneratorStep generator_step_gradients(const AdversarialTriad& triad, const Matrix& source_x,
                                       std::span<const double> source_y, const Matrix& target_x) {
  const std::size_t ns = source_x.rows();
  const Matrix x = stack(source_x, target_x);
  ForwardCache g_cache;
  const Matrix z = mlp_forward(triad.generator, x, g_cache);

  // Classification term on the source rows only.
  std::vector<std::size_t> src_rows(ns);
  std::iota(src_rows.begin(), src_rows.end(), std::size_t{0});
  const Matrix zs = z.select_rows(src_rows);
  ForwardCache c_cache;
  Matrix pc = mlp_forward(triad.classifier, zs, c_cache);
  const double c_scale = 1.0 / static_cast<double>(ns);
  Matrix c_up(ns, 1, bce_logit_grad(pc.flat(), source_y, {}, c_scale));
  auto c_back = mlp_backward(triad.classifier, c_cache, c_up, GradientAt::logits);

  // Domain term on all rows, sign-reversed for the generator.
  const auto dy = domain_labels(ns, target_x.rows());
  ForwardCache d_cache;
  Matrix pd = mlp_forward(triad.discriminator, z, d_cache);
  const double d_scale = 1.0 / static_cast<double>(dy.size());
  Matrix d_up(dy.size(), 1, bce_logit_grad(pd.flat(), dy, {}, -triad.config.lambda * d_scale));
  auto d_back = mlp_backward(triad.discriminator, d_cache, d_up, GradientAt::logits);

  Matrix dz = d_back.input_grad;
  for (std::size_t r = 0; r < ns; ++r)
    for (std::size_t c = 0; c < dz.cols(); ++c) dz(r, c) += c_back.input_grad(r, c);

  GeneratorStep step;
  step.classifier_loss = bce_loss(pc.flat(), source_y).loss * c_scale;
  step.domain_loss = bce_loss(pd.flat(), dy).loss * d_scale;
  step.loss = step.classifier_loss - triad.config.lambda * step.domain_loss;
  step.generator = mlp_backward(triad.generator, g_cache, dz).grads;
  step.classifier = std::move(c_back.grads);
  return step;
}

double generator_objective(const AdversarialTriad& triad, const Matrix& source_x,
                           std::span<const double> source_y, const Matrix& target_x) {
  const Matrix zs = mlp_forward(triad.generator, source_x);
  const Matrix z = stack(zs, mlp_forward(triad.generator, target_x));
  const auto dy = domain_labels(source_x.rows(), target_x.rows());
  const double lc = bce_loss(mlp_forward(triad.classifier, zs).flat(), source_y).loss /
                    static_cast<double>(source_x.rows());
  const double ld = bce_loss(mlp_forward(triad.discriminator, z).flat(), dy).loss /
                    static_cast<double>(dy.size());
  return lc - triad.config.lambda * ld;
}

AdaptReport adapt_train(AdversarialTriad& triad, const DomainPair& pair, std::size_t epochs,
                        std::uint64_t seed) {
  const std::size_t ns = pair.source_x.rows(), nt = pair.target_x.rows();
  if (ns == 0 || nt == 0) throw PreconditionError("adapt_train needs non-empty source and target");
  if (pair.source_y.size() != ns) throw ShapeError("adapt_train: source label count");
  if (pair.source_x.cols() != triad.input_dim() || pair.target_x.cols() != triad.input_dim())
    throw ShapeError("adapt_train: input width");

  const std::size_t mb = std::max<std::size_t>(1, triad.config.minibatch);
  const std::size_t larger = std::max(ns, nt);
  std::size_t steps = (larger + mb - 1) / mb;
  if (triad.config.max_minibatches_per_epoch)
    steps = std::min(steps, triad.config.max_minibatches_per_epoch);

  Rng rng(seed);
  std::vector<std::size_t> s_order(ns), t_order(nt);
  std::iota(s_order.begin(), s_order.end(), std::size_t{0});
  std::iota(t_order.begin(), t_order.end(), std::size_t{0});
  std::vector<std::size_t> s_idx, t_idx;
  std::vector<double> yb;
  AdaptReport report;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(s_order.begin(), s_order.end(), rng);
    std::shuffle(t_order.begin(), t_order.end(), rng);
    double d_total = 0.0, c_total = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      // The smaller domain wraps around so every minibatch is full on both sides.
      const std::size_t take_s = std::min(mb, ns), take_t = std::min(mb, nt);
      s_idx.clear();
      t_idx.clear();
      for (std::size_t i = 0; i < take_s; ++i) s_idx.push_back(s_order[(k * mb + i) % ns]);
      for (std::size_t i = 0; i < take_t; ++i) t_idx.push_back(t_order[(k * mb + i) % nt]);
      const Matrix sx = pair.source_x.select_rows(s_idx);
      const Matrix tx = pair.target_x.select_rows(t_idx);
      yb.resize(take_s);
      for (std::size_t i = 0; i < take_s; ++i) yb[i] = pair.source_y[s_idx[i]];

      auto d = discriminator_step_gradients(triad, sx, tx);
      adam_step(triad.discriminator, d.discriminator, triad.discriminator_opt);
      d_total += d.loss;

      auto g = generator_step_gradients(triad, sx, yb, tx);
      adam_step(triad.generator, g.generator, triad.generator_opt);
      adam_step(triad.classifier, g.classifier, triad.classifier_opt);
      c_total += g.classifier_loss;
    }
    report.discriminator_loss.push_back(d_total / static_cast<double>(steps));
    report.classifier_loss.push_back(c_total / static_cast<double>(steps));
  }
  return report;
}

std::vector<double> debiased_predict(const AdversarialTriad& triad, const Matrix& x) {
  if (x.cols() != triad.input_dim()) throw ShapeError("debiased_predict: input width");
  return mlp_predict(triad.classifier, mlp_forward(triad.generator, x));
}

std::vector<double> domain_scores(const AdversarialTriad& triad, const Matrix& x) {
  return mlp_predict(triad.discriminator, mlp_forward(triad.generator, x));
}

double predicted_positive_rate(std::span<const double> p) {
  if (p.empty()) throw PreconditionError("predicted positive rate of an empty set");
  std::size_t pos = 0;
  for (double v : p) pos += v >= 0.5;
  return static_cast<double>(pos) / static_cast<double>(p.size());
}

double parity_gap(std::span<const double> source_probs, std::span<const double> target_probs) {
  return std::abs(predicted_positive_rate(source_probs) - predicted_positive_rate(target_probs));
}

double parity_gap(const AdversarialTriad& triad, const Matrix& source_x, const Matrix& target_x) {
  return parity_gap(debiased_predict(triad, source_x), debiased_predict(triad, target_x));
}

std::pair<double, double> positive_rate_divergence(std::span<const double> accepted_labels,
                                                   std::span<const double> population_labels,
                                                   OracleAccess) {
  if (accepted_labels.empty() || population_labels.empty())
    throw PreconditionError("positive_rate_divergence: empty input");
  auto rate = [](std::span<const double> y) {
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  };
  return {rate(accepted_labels), rate(population_labels)};
}

AdaptDiagnostics diagnose(const AdversarialTriad& triad, const DomainPair& pair) {
  AdaptDiagnostics d;
  const auto ps = debiased_predict(triad, pair.source_x);
  const auto pt = debiased_predict(triad, pair.target_x);
  d.source_positive_rate = predicted_positive_rate(ps);
  d.target_positive_rate = predicted_positive_rate(pt);
  d.parity_gap = std::abs(d.source_positive_rate - d.target_positive_rate);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) correct += (ps[i] >= 0.5) == (pair.source_y[i] == 1.0);
  d.classifier_source_accuracy = static_cast<double>(correct) / static_cast<double>(ps.size());
  std::size_t right = 0;
  for (double v : domain_scores(triad, pair.source_x)) right += v < 0.5;
  for (double v : domain_scores(triad, pair.target_x)) right += v >= 0.5;
  d.discriminator_accuracy =
      static_cast<double>(right) / static_cast<double>(pair.source_x.rows() + pair.target_x.rows());
  return d;
}

}  // namespace blp
