#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blp/adapt/triad.hpp"
#include "blp/env/accepted_set.hpp"
#include "blp/nn/adam.hpp"
#include "blp/nn/mlp.hpp"

namespace blp {

// Everything a policy may look at when deciding step t: the unlabeled batch
// and the accepted set with its revealed labels.
struct StepInput {
  std::size_t step = 1;
  const Matrix& x;
  const AcceptedSet& accepted;
};

struct PointDiagnostics {
  std::optional<double> biased_score;
  std::optional<int> debiased_vote;
  std::optional<double> pseudo_score;
  std::optional<double> ucb_bonus;
  std::optional<double> eps;
};

struct PolicyDecision {
  std::vector<int> accept;
  std::vector<PointDiagnostics> diagnostics;
  // Rows used as forced-positive pseudo labels this step (B_t^0 for AdOpt,
  // the random candidates for PLOT).
  std::vector<std::size_t> pseudo_candidates;
  std::optional<AdaptDiagnostics> adaptation;
};

struct BiasedModelConfig {
  std::vector<std::size_t> hidden = {40, 40};
  AdamConfig adam{};
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  // Train on a uniform subsample of the accepted set when it is larger
  // (0 = always the full set).
  std::size_t max_points = 0;
  bool warm_start = true;
};

struct PolicyConfig {
  BiasedModelConfig biased;
  // eps_t = min(1, eps_c / sqrt(t)).
  double eps_c = 0.05;
  double ucb_alpha = 0.4;
  double ucb_gamma = 0.9;
  double ucb_ridge = 1e-6;
  // PLOT candidate probability: fixed plot_eps, or the eps-greedy schedule.
  double plot_eps = 0.05;
  bool plot_decayed_eps = false;
  std::size_t pseudo_epochs = 20;
  bool restrict_pseudo_accept_to_filtered = false;
  TriadConfig triad;
  std::uint64_t seed = 0;
};

double eps_schedule(double c, std::size_t t);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  // Must not mutate anything the environment owns; decide-then-apply.
  virtual PolicyDecision decide(const StepInput& in) = 0;
  // Called after the environment applied `decision` for the same step.
  virtual void observe(const StepInput&, const PolicyDecision&) {}
  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

using PolicyFactory =
    std::function<std::unique_ptr<Policy>(std::string_view name, const PolicyConfig&, std::size_t dim)>;

inline constexpr std::string_view kPolicyNames[] = {"greedy", "eps_greedy", "neural_ucb",
                                                    "adversarial", "plot", "adopt"};
// Throws ConfigError for an unknown name.
std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyConfig& config,
                                    std::size_t input_dim);

// Clipped BCE on the accepted set plus -log rho on every pseudo-labelled row; with
// no pseudo rows it is exactly the biased-model BCE.
double pseudo_label_loss(const MlpParams& params, const Matrix& accepted_x,
                         std::span<const double> accepted_y, const Matrix& pseudo_x);

// NeuralUCB pieces on a diagonal design matrix.
double ucb_bonus(std::span<const double> g, std::span<const double> z_diag, double alpha,
                 double ridge = 1e-6);
void ucb_update(std::vector<double>& z_diag, const std::vector<std::vector<double>>& accepted_g,
                double gamma);
// Last-hidden-layer activations: the gradient of the output logit with
// respect to the last layer's weights.
Matrix ucb_features(const MlpParams& params, const Matrix& x);

// Diagnostics CSV: step, point, biased_score, debiased_vote, pseudo_score,
// ucb_bonus, eps, decision.
void write_policy_diagnostics_header(std::ostream& out);
void write_policy_diagnostics(std::ostream& out, std::size_t step, const PolicyDecision& d);

void write_adaptation_header(std::ostream& out);
void write_adaptation_row(std::ostream& out, std::size_t step, const AdaptDiagnostics& d);

}  // namespace blp
