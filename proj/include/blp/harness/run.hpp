#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blp/harness/config.hpp"
#include "blp/harness/scenario.hpp"
#include "blp/metrics/confusion.hpp"
#include "blp/metrics/fairness.hpp"
#include "blp/policy/policy.hpp"

namespace blp {

struct StepRecord {
  std::size_t step = 0;
  double regret = 0.0;
  double cum_regret = 0.0;
  std::size_t accepts = 0;
  ConfusionCounts counts;
  // Largest pairwise difference in batch acceptance rate between groups of
  // the tracked attribute; undefined with fewer than two groups present.
  std::optional<double> parity_gap;
  std::optional<double> eps;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunSpec {
  std::string policy;
  Sampler sampler = Sampler::uniform;
  std::uint64_t seed = 0;

  std::string id() const;  // policy__sampler__seed

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct RunRecord {
  RunSpec spec;
  std::string fingerprint;
  std::string resolved_config;
  std::string group_attribute;  // empty when the data has no groups
  std::vector<StepRecord> steps;
  std::vector<std::map<std::string, ConfusionCounts>> group_counts;  // per step
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
  double final_regret() const { return steps.empty() ? 0.0 : steps.back().cum_regret; }
  std::vector<double> regret_curve() const;
  FairnessReport fairness(std::size_t window) const;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct RunOptions {
  // Run directory for incremental persistence; nothing is written when empty.
  std::string dir;
  // Continue from the checkpoint in `dir` if one exists.
  bool resume = false;
  // Return after this many steps without a final checkpoint (crash stand-in).
  std::optional<std::size_t> stop_after;
  // Replaces make_policy, e.g. for test probes.
  PolicyFactory factory;
};

// Per-run seeds. The stream depends on (sampler, seed) only, so every policy
// sees the same batches; the policy seed also hashes the policy name.
std::uint64_t stream_seed(std::uint64_t master, Sampler sampler, std::uint64_t seed);
std::uint64_t policy_seed(std::uint64_t master, const RunSpec& spec);

// Runs t = 1..horizon. Throws ConfigError / DataError / StateError; I/O
// failures throw DataError naming the path.
RunRecord run_experiment(const ExperimentConfig& config, const Scenario& scenario, const RunSpec& spec,
                         const RunOptions& options = {});

// steps.csv: step, cum_regret, regret, accepts, tp, fp, fn, tn, parity_gap, eps
void write_steps_header(std::ostream& out);
void write_step_row(std::ostream& out, const StepRecord& r);
std::vector<StepRecord> read_steps(std::istream& in);
// groups.csv: step, group, tp, fp, fn, tn
void write_groups_header(std::ostream& out);
void write_group_rows(std::ostream& out, std::size_t step, const std::map<std::string, ConfusionCounts>& m);
std::vector<std::map<std::string, ConfusionCounts>> read_groups(std::istream& in, std::size_t steps);

// meta.ini with status running | complete | failed.
void write_run_meta(const std::string& dir, const RunRecord& rec, const std::string& status);

// Loads a completed or partial run directory (meta.ini, steps.csv, groups.csv).
RunRecord read_run_dir(const std::string& dir);

}  // namespace blp
