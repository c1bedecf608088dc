#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "blp/env/batch.hpp"
#include "blp/nn/adam.hpp"
#include "blp/nn/mlp.hpp"

namespace blp {

struct TriadConfig {
  std::size_t encoded_dim = 100;
  std::vector<std::size_t> generator_hidden = {100, 100};
  std::vector<std::size_t> classifier_hidden = {100};
  std::vector<std::size_t> discriminator_hidden = {100, 100};
  double lr_generator = 1e-4;
  double lr_classifier = 1e-4;
  double lr_discriminator = 5e-4;
  double beta1 = 0.0;
  double beta2 = 0.99;
  std::size_t epochs_per_step = 10;
  std::size_t minibatch = 32;
  // Weight of the reversed domain loss in the generator objective.
  double lambda = 1.0;
  // Largest source sample drawn from the accepted set per step.
  std::size_t source_cap = 3200;
  // 0 = a full pass over the larger domain per epoch.
  std::size_t max_minibatches_per_epoch = 0;
  // Re-initialise weights (and moments) at every step instead of warm starting.
  bool reset_weights = false;
  bool reset_moments = false;

  friend bool operator==(const TriadConfig&, const TriadConfig&) = default;
};

// Generator G (identity head), task classifier C and domain discriminator D,
// each with its own Adam state.
struct AdversarialTriad {
  MlpParams generator, classifier, discriminator;
  AdamState generator_opt, classifier_opt, discriminator_opt;
  TriadConfig config;

  std::size_t input_dim() const { return generator.input_dim(); }
  friend bool operator==(const AdversarialTriad&, const AdversarialTriad&) = default;
};

AdversarialTriad make_triad(std::size_t input_dim, const TriadConfig& config, std::uint64_t seed);
// All weights zero: every prediction is exactly 1/2.
AdversarialTriad make_zero_triad(std::size_t input_dim, const TriadConfig& config);
void reset_optimizers(AdversarialTriad& triad);

// Source S: labelled accepted points. Target T: the unlabelled incoming batch.
struct DomainPair {
  Matrix source_x;
  std::vector<double> source_y;
  Matrix target_x;
};

// Uniform subsample of the accepted points without replacement when they
// exceed `cap`; the whole set otherwise.
DomainPair make_domain_pair(const Matrix& accepted_x, std::span<const double> accepted_y,
                            const Matrix& batch_x, std::size_t cap, std::uint64_t seed);

struct AdaptReport {
  std::vector<double> discriminator_loss;  // mean domain BCE per epoch
  std::vector<double> classifier_loss;     // mean source BCE per epoch
};

// Alternating updates per minibatch: one discriminator step (T -> 1, S -> 0),
// then one generator + classifier step on BCE_C(S) - lambda * BCE_D(S u T).
// Target labels are never part of the input. Throws PreconditionError when S
// or T is empty.
AdaptReport adapt_train(AdversarialTriad& triad, const DomainPair& pair, std::size_t epochs,
                        std::uint64_t seed);

std::vector<double> debiased_predict(const AdversarialTriad& triad, const Matrix& x);
std::vector<double> domain_scores(const AdversarialTriad& triad, const Matrix& x);

// Mean of hard (p >= 1/2) decisions.
double predicted_positive_rate(std::span<const double> probabilities);
double parity_gap(std::span<const double> source_probs, std::span<const double> target_probs);
double parity_gap(const AdversarialTriad& triad, const Matrix& source_x, const Matrix& target_x);

// (P(y=1 | accepted), P(y=1 | population)). Population labels are hidden, so
// an oracle token is required. Throws PreconditionError on empty inputs.
std::pair<double, double> positive_rate_divergence(std::span<const double> accepted_labels,
                                                   std::span<const double> population_labels,
                                                   OracleAccess);

struct AdaptDiagnostics {
  double discriminator_accuracy = 0.0;
  double classifier_source_accuracy = 0.0;
  double parity_gap = 0.0;
  double source_positive_rate = 0.0;
  double target_positive_rate = 0.0;
};
AdaptDiagnostics diagnose(const AdversarialTriad& triad, const DomainPair& pair);

// Gradients of one generator + classifier update on a fixed minibatch, and the
// loss they differentiate. Exposed for gradient checking.
struct GeneratorStep {
  double loss = 0.0;
  double classifier_loss = 0.0;
  double domain_loss = 0.0;
  MlpGrads generator, classifier;
};
GeneratorStep generator_step_gradients(const AdversarialTriad& triad, const Matrix& source_x,
                                       std::span<const double> source_y, const Matrix& target_x);
double generator_objective(const AdversarialTriad& triad, const Matrix& source_x,
                           std::span<const double> source_y, const Matrix& target_x);

struct DiscriminatorStep {
  double loss = 0.0;  // mean domain BCE, what D minimises
  MlpGrads discriminator;
};
DiscriminatorStep discriminator_step_gradients(const AdversarialTriad& triad, const Matrix& source_x,
                                               const Matrix& target_x);

}  // namespace blp
