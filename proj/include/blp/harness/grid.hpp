#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blp/harness/run.hpp"
#include "blp/metrics/stats.hpp"

namespace blp {

struct GridOptions {
  // Root output directory; each run persists to <out>/runs/<run id>.
  std::string out_dir;
  int workers = 1;
  bool resume = false;
  PolicyFactory factory;
};

// policies x samplers x seeds, in config order.
std::vector<RunSpec> grid_specs(const ExperimentConfig& config);

// Failed runs come back with `error` set and whatever steps completed.
std::vector<RunRecord> run_grid(const ExperimentConfig& config, const Scenario& scenario,
                                const GridOptions& options = {});

struct PolicyCurve {
  std::string policy;
  std::vector<std::string> run_ids;       // sorted
  std::vector<std::vector<double>> runs;  // cumulative regret, same order
  std::vector<double> mean, std;

  friend bool operator==(const PolicyCurve&, const PolicyCurve&) = default;
};

struct PairedComparison {
  std::string a, b;  // differences are a - b, paired on (sampler, seed)
  std::size_t n = 0;
  double mean_diff = 0.0;
  std::optional<double> t;  // undefined for n < 2 or zero variance
  std::vector<ConfidenceInterval> ci_by_step;
};

struct Aggregate {
  std::size_t expected = 0, completed = 0;
  std::vector<std::string> warnings;
  std::vector<PolicyCurve> curves;  // sorted by policy
  std::vector<PairedComparison> comparisons;
  std::vector<std::pair<std::string, FairnessReport>> fairness;  // pooled over each policy's runs
};

// Uses completed runs only and does not depend on record order.
Aggregate aggregate(const std::vector<RunRecord>& records, std::size_t fairness_window = 50,
                    std::size_t expected = 0);

// Writes regret_curves.csv, regret_curves.dat, fairness.csv, ci_difference.csv
// and stats.json into out_dir. Throws PreconditionError for empty input
// before touching the directory.
void emit_reports(const std::vector<RunRecord>& records, const std::string& out_dir,
                  std::size_t fairness_window = 50, std::size_t expected = 0);

// regret_curves.csv: step, policy, mean, std, then one column per run id.
void write_regret_curves(std::ostream& out, const std::vector<PolicyCurve>& curves);
std::vector<PolicyCurve> read_regret_curves(std::istream& in);

// Every run directory under <dir>/runs.
std::vector<RunRecord> read_runs(const std::string& dir);

}  // namespace blp
