#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "blp/errors.hpp"
#include "blp/harness/grid.hpp"

extern char** environ;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPartial = 4;

blp::ExperimentConfig load(const std::string& path) {
  return blp::load_experiment_config(path, const_cast<const char* const*>(environ));
}

int cmd_run(const std::string& config_path, std::string policy, std::string sampler, std::optional<std::uint64_t> seed,
            std::string out, bool resume) {
  const auto config = load(config_path);
  blp::RunSpec spec;
  spec.policy = policy.empty() ? config.policies.front() : policy;
  if (sampler.empty()) {
    spec.sampler = config.samplers.front();
  } else {
    auto s = blp::parse_sampler(sampler);
    if (!s) throw blp::ConfigError("unknown sampler '" + sampler + "'");
    spec.sampler = *s;
  }
  spec.seed = seed.value_or(config.seeds.front());
  if (out.empty()) out = config.output;
  const auto scenario = blp::load_scenario(config.dataset);
  for (const auto& w : scenario.data->warnings) std::cerr << "warning: " << w << '\n';
  blp::RunOptions ro;
  ro.dir = (std::filesystem::path(out) / "runs" / spec.id()).string();
  ro.resume = resume;
  const auto rec = blp::run_experiment(config, scenario, spec, ro);
  blp::emit_reports({rec}, out, config.fairness_window);
  std::cout << spec.id() << ": " << rec.steps.size() << " steps, cumulative regret " << rec.final_regret() << '\n';
  return 0;
}

int cmd_grid(const std::string& config_path, std::string out, int workers, bool resume) {
  const auto config = load(config_path);
  if (out.empty()) out = config.output;
  const auto scenario = blp::load_scenario(config.dataset);
  for (const auto& w : scenario.data->warnings) std::cerr << "warning: " << w << '\n';
  blp::GridOptions go;
  go.out_dir = out;
  go.workers = workers;
  go.resume = resume;
  const auto records = blp::run_grid(config, scenario, go);
  std::size_t failed = 0;
  for (const auto& r : records) {
    if (r.ok()) {
      std::cout << r.spec.id() << ": cumulative regret " << r.final_regret() << '\n';
    } else {
      ++failed;
      std::cerr << r.spec.id() << " failed: " << *r.error << '\n';
    }
  }
  if (failed == records.size()) {
    std::cerr << "every run failed\n";
    return kExitPartial;
  }
  blp::emit_reports(records, out, config.fairness_window, records.size());
  return failed ? kExitPartial : 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  const auto records = blp::read_runs(in);
  if (records.empty()) throw blp::DataError("no runs found under " + in);
  std::size_t window = 50;
  for (const auto& r : records)
    if (!r.resolved_config.empty()) {
      std::istringstream s(r.resolved_config);
      window = blp::ExperimentConfig::from_tree(blp::parse_ini(s)).fairness_window;
      break;
    }
  blp::emit_reports(records, out.empty() ? in : out, window);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.ok() ? 0 : 1;
  return failed ? kExitPartial : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective-labels online acceptance experiments"};
  app.require_subcommand(1);

  std::string config_path, policy, sampler, out, in;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool resume = false;

  auto* run = app.add_subcommand("run", "Run one (policy, sampler, seed) triple");
  run->add_option("--config", config_path, "INI config file")->required();
  run->add_option("--policy", policy, "Policy name (default: first in config)");
  run->add_option("--sampler", sampler, "Sampler name (default: first in config)");
  run->add_option("--seed", seed, "Seed (default: first in config)");
  run->add_option("--out", out, "Output directory (default: [experiment] output)");
  run->add_flag("--resume", resume, "Continue from the run's checkpoint");

  auto* grid = app.add_subcommand("grid", "Run every policy x sampler x seed");
  grid->add_option("--config", config_path, "INI config file")->required();
  grid->add_option("--out", out, "Output directory (default: [experiment] output)");
  grid->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  grid->add_flag("--resume", resume, "Continue runs from their checkpoints");

  auto* report = app.add_subcommand("report", "Rebuild reports from run directories");
  report->add_option("--in", in, "Directory holding runs/")->required();
  report->add_option("--out", out, "Report directory (default: --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, policy, sampler, seed, out, resume);
    if (*grid) return cmd_grid(config_path, out, workers, resume);
    return cmd_report(in, out);
  } catch (const blp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const blp::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
