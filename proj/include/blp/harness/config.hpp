#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blp/data/csv_loader.hpp"
#include "blp/data/idx_loader.hpp"
#include "blp/data/synthetic.hpp"
#include "blp/env/regret.hpp"
#include "blp/env/stream.hpp"
#include "blp/policy/policy.hpp"

namespace blp {

// section -> key -> value, both levels sorted.
using ConfigTree = std::map<std::string, std::map<std::string, std::string>>;

ConfigTree parse_ini(std::istream& in);
ConfigTree read_ini_file(const std::string& path);
// Applies BLP__SECTION__KEY=value variables (section and key lower-cased;
// a "." in a section name is written as "_" after the first, e.g.
// BLP__GROUP_MAP_RACE__WHITE sets [group_map.race] white).
void apply_env_overrides(ConfigTree& tree, const char* const* envp);
std::string dump_ini(const ConfigTree& tree);

// Two-cluster lock-in world: cluster A near x1 = -2, cluster B near x1 = +2.
// rho* = sigmoid(logit_a - slope_a_x1 * (x1 + 2) + slope_a_x2 * x2) inside A
// and sigmoid(logit_b) inside B. The first batch holds A points plus B
// negatives only, which is enough for a greedy learner to write B off.
struct TwoClusterSpec {
  std::size_t n = 20000;
  double fraction_b = 0.5;
  double logit_a = 1.5;
  double slope_a_x1 = 1.5;
  double slope_a_x2 = 0.0;
  double logit_b = 2.2;
  double spread = 0.5;
  std::size_t lead_in_a = 16;
  std::size_t lead_in_b_negatives = 16;
  // Group tag for B points ("cluster" attribute), e.g. a protected minority.
  std::string group_a = "A";
  std::string group_b = "B";
  std::uint64_t seed = 0;
};

struct DatasetConfig {
  std::string kind = "synthetic";  // synthetic | csv | idx | two_cluster
  SyntheticSpec synthetic{.n = 20000, .dim = 2, .theta = {1.0, -1.0}};
  std::string path;  // csv
  DatasetSchema schema;
  std::string images, labels;  // idx
  IdxOptions idx;
  TwoClusterSpec two_cluster;
};

struct ExperimentConfig {
  std::vector<std::string> policies = {"greedy", "adopt"};
  std::vector<Sampler> samplers = {Sampler::uniform};
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t master_seed = 0;
  std::size_t horizon = 2500;
  std::size_t batch_size = 32;
  RegretForm regret = RegretForm::automatic;
  bool oracle_metrics = true;
  std::string group_attribute;  // fairness; empty = first group column, if any
  std::size_t fairness_window = 50;
  std::string output = "blp_out";
  std::size_t checkpoint_every = 1;
  bool write_diagnostics = true;

  DatasetConfig dataset;
  StreamConfig stream;  // sampler knobs; batch size, horizon and seed come from above
  PolicyConfig policy;  // seed is derived per run

  ConfigTree to_tree() const;
  // Unknown sections/keys and unparsable values throw ConfigError.
  static ExperimentConfig from_tree(const ConfigTree& tree);
  std::string resolved_ini() const { return dump_ini(to_tree()); }
  // FNV-1a over the sorted resolved key=value lines.
  std::string fingerprint() const;
};

ExperimentConfig load_experiment_config(const std::string& path, const char* const* envp = nullptr);

}  // namespace blp
