#pragma once

// cereal bindings for the model types, used by run checkpoints.
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

#include "blp/adapt/triad.hpp"
#include "blp/nn/adam.hpp"
#include "blp/nn/matrix.hpp"
#include "blp/nn/mlp.hpp"

namespace blp {

template <class Archive>
void save(Archive& ar, const Matrix& m) {
  ar(m.rows(), m.cols(), m.values());
}

template <class Archive>
void load(Archive& ar, Matrix& m) {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;
  ar(rows, cols, data);
  m = Matrix(rows, cols, std::move(data));
}

template <class Archive>
void serialize(Archive& ar, MlpParams& p) {
  ar(p.layer_sizes, p.weights, p.biases, p.hidden_activation, p.output_activation);
}

template <class Archive>
void serialize(Archive& ar, MlpGrads& g) {
  ar(g.weights, g.biases);
}

template <class Archive>
void serialize(Archive& ar, AdamState& s) {
  ar(s.m, s.v, s.step_count, s.beta1, s.beta2, s.epsilon, s.learning_rate);
}

template <class Archive>
void serialize(Archive& ar, TriadConfig& c) {
  ar(c.encoded_dim, c.generator_hidden, c.classifier_hidden, c.discriminator_hidden, c.lr_generator,
     c.lr_classifier, c.lr_discriminator, c.beta1, c.beta2, c.epochs_per_step, c.minibatch, c.lambda,
     c.source_cap, c.max_minibatches_per_epoch, c.reset_weights, c.reset_moments);
}

template <class Archive>
void serialize(Archive& ar, AdversarialTriad& t) {
  ar(t.generator, t.classifier, t.discriminator, t.generator_opt, t.classifier_opt,
     t.discriminator_opt, t.config);
}

}  // namespace blp
