#include <algorithm>
#include <cereal/archives/binary.hpp>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "blp/csv.hpp"
#include "blp/errors.hpp"
#include "blp/nn/loss.hpp"
#include "blp/nn/train.hpp"
#include "blp/policy/policy.hpp"
#include "blp/rng.hpp"
#include "blp/serialize.hpp"

namespace blp {

double eps_schedule(double c, std::size_t t) {
  if (t == 0) throw PreconditionError("eps schedule is defined for t >= 1");
  return std::min(1.0, c / std::sqrt(static_cast<double>(t)));
}

double pseudo_label_loss(const MlpParams& params, const Matrix& accepted_x,
                         std::span<const double> accepted_y, const Matrix& pseudo_x) {
  double loss = bce_loss(mlp_predict(params, accepted_x), accepted_y).loss;
  if (pseudo_x.rows() == 0) return loss;
  const std::vector<double> ones(pseudo_x.rows(), 1.0);
  return loss + bce_loss(mlp_predict(params, pseudo_x), ones).loss;
}

double ucb_bonus(std::span<const double> g, std::span<const double> z_diag, double alpha,
                 double ridge) {
  if (g.size() != z_diag.size()) throw ShapeError("ucb_bonus: feature width");
  double q = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) q += g[i] * g[i] / std::max(z_diag[i], ridge);
  return alpha * std::sqrt(q);
}

void ucb_update(std::vector<double>& z_diag, const std::vector<std::vector<double>>& accepted_g,
                double gamma) {
  for (double& z : z_diag) z *= gamma;
  for (const auto& g : accepted_g) {
    if (g.size() != z_diag.size()) throw ShapeError("ucb_update: feature width");
    for (std::size_t i = 0; i < g.size(); ++i) z_diag[i] += g[i] * g[i];
  }
}

Matrix ucb_features(const MlpParams& params, const Matrix& x) {
  ForwardCache cache;
  mlp_forward(params, x, cache);
  return cache.post[cache.post.size() - 2];
}

namespace {

std::uint64_t step_seed(std::uint64_t seed, std::string_view tag, std::size_t step) {
  return mix64(derive_seed(seed, {tag}) ^ static_cast<std::uint64_t>(step));
}

std::vector<std::size_t> uniform_subsample(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (cap == 0 || n <= cap) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < cap; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

bool first_batch(const StepInput& in) { return in.step == 1 || in.accepted.empty(); }

PolicyDecision accept_all(std::size_t n) {
  PolicyDecision d;
  d.accept.assign(n, 1);
  d.diagnostics.resize(n);
  return d;
}

// The biased model rho_theta, retrained on the accepted set every step.
class BiasedModel {
 public:
  BiasedModel(const BiasedModelConfig& cfg, std::size_t dim, std::uint64_t seed)
      : cfg_(cfg), seed_(seed), dim_(dim) {
    init();
  }

  void retrain(const AcceptedSet& accepted, std::size_t step) {
    if (!cfg_.warm_start) init();
    const auto rows = training_rows(accepted, step);
    const Matrix x = accepted.features().select_rows(rows);
    std::vector<double> y;
    for (std::size_t r : rows) y.push_back(accepted.labels()[r]);
    train_supervised(params, state, x, y,
                     {cfg_.epochs, cfg_.batch_size, step_seed(seed_, "biased", step)});
  }

  std::vector<std::size_t> training_rows(const AcceptedSet& accepted, std::size_t step) const {
    return uniform_subsample(accepted.size(), cfg_.max_points,
                             step_seed(seed_, "biased-sample", step));
  }

  const BiasedModelConfig& config() const { return cfg_; }

  MlpParams params;
  AdamState state;

 private:
  void init() {
    std::vector<std::size_t> sizes{dim_};
    sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    sizes.push_back(1);
    params = make_mlp(sizes, Activation::sigmoid, derive_seed(seed_, {"biased-init"}));
    state = AdamState::for_params(params, cfg_.adam);
  }

  BiasedModelConfig cfg_;
  std::uint64_t seed_;
  std::size_t dim_;
};

// Trains a copy of the biased model on the accepted set plus `pseudo` rows
// labelled 1 and returns its scores on x.
std::vector<double> pseudo_label_scores(const BiasedModel& biased, const StepInput& in,
                                        const std::vector<std::size_t>& pseudo, std::size_t epochs,
                                        std::uint64_t seed) {
  MlpParams p = biased.params;
  AdamState s = biased.state;
  const auto rows = biased.training_rows(in.accepted, in.step);
  Matrix x = in.accepted.features().select_rows(rows);
  std::vector<double> y;
  for (std::size_t r : rows) y.push_back(in.accepted.labels()[r]);
  x.append_rows(in.x.select_rows(pseudo));
  y.insert(y.end(), pseudo.size(), 1.0);
  train_supervised(p, s, x, y, {epochs, biased.config().batch_size, seed});
  return mlp_predict(p, in.x);
}

void greedy_fill(PolicyDecision& d, const std::vector<double>& scores) {
  d.accept.resize(scores.size());
  d.diagnostics.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    d.accept[i] = scores[i] >= 0.5;
    d.diagnostics[i].biased_score = scores[i];
  }
}

// Step 6: keep every biased accept, add rows the pseudo-label model accepts.
void apply_pseudo(PolicyDecision& d, const std::vector<double>& pseudo_scores, bool restrict_to_candidates) {
  std::vector<char> candidate(d.accept.size(), 0);
  for (std::size_t i : d.pseudo_candidates) candidate[i] = 1;
  for (std::size_t i = 0; i < d.accept.size(); ++i) {
    d.diagnostics[i].pseudo_score = pseudo_scores[i];
    if (restrict_to_candidates && !candidate[i]) continue;
    if (pseudo_scores[i] >= 0.5) d.accept[i] = 1;
  }
}

class GreedyPolicy : public Policy {
 public:
  GreedyPolicy(const PolicyConfig& cfg, std::size_t dim)
      : cfg_(cfg), model_(cfg.biased, dim, derive_seed(cfg.seed, {"policy"})) {}

  std::string_view name() const override { return "greedy"; }

  PolicyDecision decide(const StepInput& in) override {
    if (first_batch(in)) return accept_all(in.x.rows());
    model_.retrain(in.accepted, in.step);
    PolicyDecision d;
    greedy_fill(d, mlp_predict(model_.params, in.x));
    return d;
  }

  void save(std::ostream& out) const override {
    cereal::BinaryOutputArchive ar(out);
    ar(model_.params, model_.state);
  }
  void load(std::istream& in) override {
    cereal::BinaryInputArchive ar(in);
    ar(model_.params, model_.state);
  }

 protected:
  PolicyConfig cfg_;
  BiasedModel model_;
};

class EpsGreedyPolicy : public GreedyPolicy {
 public:
  using GreedyPolicy::GreedyPolicy;
  std::string_view name() const override { return "eps_greedy"; }

  PolicyDecision decide(const StepInput& in) override {
    PolicyDecision d = GreedyPolicy::decide(in);
    if (first_batch(in)) return d;
    const double eps = eps_schedule(cfg_.eps_c, in.step);
    Rng rng(step_seed(cfg_.seed, "eps", in.step));
    for (std::size_t i = 0; i < d.accept.size(); ++i) {
      d.diagnostics[i].eps = eps;
      if (d.accept[i]) continue;
      if (uniform01(rng) < eps) d.accept[i] = 1;
    }
    return d;
  }
};

class NeuralUcbPolicy : public GreedyPolicy {
 public:
  NeuralUcbPolicy(const PolicyConfig& cfg, std::size_t dim)
      : GreedyPolicy(cfg, dim), z_(cfg.biased.hidden.empty() ? dim : cfg.biased.hidden.back(), 1.0) {}
  std::string_view name() const override { return "neural_ucb"; }

  PolicyDecision decide(const StepInput& in) override {
    if (first_batch(in)) return accept_all(in.x.rows());
    model_.retrain(in.accepted, in.step);
    PolicyDecision d;
    const auto scores = mlp_predict(model_.params, in.x);
    greedy_fill(d, scores);
    const Matrix g = ucb_features(model_.params, in.x);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double bonus = ucb_bonus(g.row(i), z_, cfg_.ucb_alpha, cfg_.ucb_ridge);
      d.diagnostics[i].ucb_bonus = bonus;
      d.accept[i] = scores[i] + bonus >= 0.5;
    }
    return d;
  }

  void observe(const StepInput& in, const PolicyDecision& d) override {
    const Matrix g = ucb_features(model_.params, in.x);
    std::vector<std::vector<double>> accepted;
    for (std::size_t i = 0; i < d.accept.size(); ++i)
      if (d.accept[i]) accepted.emplace_back(g.row(i).begin(), g.row(i).end());
    ucb_update(z_, accepted, cfg_.ucb_gamma);
  }

  void save(std::ostream& out) const override {
    cereal::BinaryOutputArchive ar(out);
    ar(model_.params, model_.state, z_);
  }
  void load(std::istream& in) override {
    cereal::BinaryInputArchive ar(in);
    ar(model_.params, model_.state, z_);
  }

  const std::vector<double>& design_diagonal() const { return z_; }

 private:
  std::vector<double> z_;
};

class PlotPolicy : public GreedyPolicy {
 public:
  using GreedyPolicy::GreedyPolicy;
  std::string_view name() const override { return "plot"; }

  PolicyDecision decide(const StepInput& in) override {
    PolicyDecision d = GreedyPolicy::decide(in);
    if (first_batch(in)) return d;
    const double eps = cfg_.plot_decayed_eps ? eps_schedule(cfg_.eps_c, in.step) : cfg_.plot_eps;
    Rng rng(step_seed(cfg_.seed, "plot-candidates", in.step));
    for (std::size_t i = 0; i < d.accept.size(); ++i) {
      d.diagnostics[i].eps = eps;
      if (!d.accept[i] && uniform01(rng) < eps) d.pseudo_candidates.push_back(i);
    }
    if (d.pseudo_candidates.empty()) return d;
    apply_pseudo(d,
                 pseudo_label_scores(model_, in, d.pseudo_candidates, cfg_.pseudo_epochs,
                                     step_seed(cfg_.seed, "pseudo", in.step)),
                 cfg_.restrict_pseudo_accept_to_filtered);
    return d;
  }
};

// Shared triad handling for the adversarial ablation and AdOpt.
class TriadHolder {
 public:
  TriadHolder(const PolicyConfig& cfg, std::size_t dim)
      : cfg_(cfg), dim_(dim), triad_(make_triad(dim, cfg.triad, derive_seed(cfg.seed, {"triad"}))) {}

  // Step 2: adapt on (accepted, batch); returns C(G(x)) for the batch.
  std::vector<double> adapt(const StepInput& in, AdaptDiagnostics& diag) {
    auto pair = make_domain_pair(in.accepted.features(), in.accepted.labels(), in.x,
                                 cfg_.triad.source_cap, step_seed(cfg_.seed, "source-sample", in.step));
    if (cfg_.triad.reset_weights)
      triad_ = make_triad(dim_, cfg_.triad, derive_seed(cfg_.seed, {"triad"}));
    else if (cfg_.triad.reset_moments)
      reset_optimizers(triad_);
    adapt_train(triad_, pair, cfg_.triad.epochs_per_step, step_seed(cfg_.seed, "adapt", in.step));
    diag = diagnose(triad_, pair);
    return debiased_predict(triad_, in.x);
  }

  AdversarialTriad& triad() { return triad_; }

 private:
  PolicyConfig cfg_;
  std::size_t dim_;
  AdversarialTriad triad_;
};

class AdversarialPolicy : public Policy {
 public:
  AdversarialPolicy(const PolicyConfig& cfg, std::size_t dim) : triad_(cfg, dim) {}
  std::string_view name() const override { return "adversarial"; }

  PolicyDecision decide(const StepInput& in) override {
    if (first_batch(in)) return accept_all(in.x.rows());
    PolicyDecision d;
    AdaptDiagnostics diag;
    const auto p = triad_.adapt(in, diag);
    d.adaptation = diag;
    d.accept.resize(p.size());
    d.diagnostics.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      d.accept[i] = p[i] >= 0.5;
      d.diagnostics[i].debiased_vote = d.accept[i];
    }
    return d;
  }

  void save(std::ostream& out) const override {
    cereal::BinaryOutputArchive ar(out);
    ar(const_cast<TriadHolder&>(triad_).triad());
  }
  void load(std::istream& in) override {
    cereal::BinaryInputArchive ar(in);
    ar(triad_.triad());
  }

 private:
  TriadHolder triad_;
};

class AdOptPolicy : public GreedyPolicy {
 public:
  AdOptPolicy(const PolicyConfig& cfg, std::size_t dim) : GreedyPolicy(cfg, dim), triad_(cfg, dim) {}
  std::string_view name() const override { return "adopt"; }

  PolicyDecision decide(const StepInput& in) override {
    if (first_batch(in)) return accept_all(in.x.rows());
    AdaptDiagnostics diag;
    const auto votes = triad_.adapt(in, diag);  // step 2
    PolicyDecision d = GreedyPolicy::decide(in);  // step 3
    d.adaptation = diag;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      const int vote = votes[i] >= 0.5;
      d.diagnostics[i].debiased_vote = vote;
      if (!d.accept[i] && vote) d.pseudo_candidates.push_back(i);  // step 4
    }
    if (d.pseudo_candidates.empty()) return d;
    apply_pseudo(d,
                 pseudo_label_scores(model_, in, d.pseudo_candidates, cfg_.pseudo_epochs,
                                     step_seed(cfg_.seed, "pseudo", in.step)),
                 cfg_.restrict_pseudo_accept_to_filtered);  // steps 5, 6
    return d;
  }

  void save(std::ostream& out) const override {
    cereal::BinaryOutputArchive ar(out);
    ar(model_.params, model_.state, const_cast<TriadHolder&>(triad_).triad());
  }
  void load(std::istream& in) override {
    cereal::BinaryInputArchive ar(in);
    ar(model_.params, model_.state, triad_.triad());
  }

 private:
  TriadHolder triad_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyConfig& config,
                                    std::size_t input_dim) {
  if (name == "greedy") return std::make_unique<GreedyPolicy>(config, input_dim);
  if (name == "eps_greedy") return std::make_unique<EpsGreedyPolicy>(config, input_dim);
  if (name == "neural_ucb") return std::make_unique<NeuralUcbPolicy>(config, input_dim);
  if (name == "adversarial") return std::make_unique<AdversarialPolicy>(config, input_dim);
  if (name == "plot") return std::make_unique<PlotPolicy>(config, input_dim);
  if (name == "adopt") return std::make_unique<AdOptPolicy>(config, input_dim);
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

namespace {
template <class T>
std::string opt_cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, int>)
    return std::to_string(*v);
  else
    return csv::format_double(*v);
}
}  // namespace

void write_policy_diagnostics_header(std::ostream& out) {
  csv::write_row(out, {"step", "point", "biased_score", "debiased_vote", "pseudo_score", "ucb_bonus",
                       "eps", "decision"});
}

void write_policy_diagnostics(std::ostream& out, std::size_t step, const PolicyDecision& d) {
  for (std::size_t i = 0; i < d.accept.size(); ++i) {
    const PointDiagnostics& p = d.diagnostics[i];
    csv::write_row(out, {std::to_string(step), std::to_string(i), opt_cell(p.biased_score),
                         opt_cell(p.debiased_vote), opt_cell(p.pseudo_score), opt_cell(p.ucb_bonus),
                         opt_cell(p.eps), std::to_string(d.accept[i])});
  }
}

void write_adaptation_header(std::ostream& out) {
  csv::write_row(out, {"step", "discriminator_accuracy", "classifier_source_accuracy", "parity_gap",
                       "source_positive_rate", "target_positive_rate"});
}

void write_adaptation_row(std::ostream& out, std::size_t step, const AdaptDiagnostics& d) {
  csv::write_row(out, {std::to_string(step), csv::format_double(d.discriminator_accuracy),
                       csv::format_double(d.classifier_source_accuracy),
                       csv::format_double(d.parity_gap), csv::format_double(d.source_positive_rate),
                       csv::format_double(d.target_positive_rate)});
}

}  // namespace blp
