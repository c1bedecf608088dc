#include "blp/harness/grid.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>

#include "blp/csv.hpp"
#include "blp/errors.hpp"

namespace fs = std::filesystem;

namespace blp {

std::vector<RunSpec> grid_specs(const ExperimentConfig& config) {
  std::vector<RunSpec> specs;
  for (const auto& p : config.policies)
    for (Sampler s : config.samplers)
      for (std::uint64_t seed : config.seeds) specs.push_back({p, s, seed});
  return specs;
}

std::vector<RunRecord> run_grid(const ExperimentConfig& config, const Scenario& scenario,
                                const GridOptions& options) {
  const auto specs = grid_specs(config);
  std::vector<RunRecord> records(specs.size());
  const int workers = std::max(1, options.workers);
  const auto n = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const RunSpec& spec = specs[static_cast<std::size_t>(i)];
    RunOptions ro;
    if (!options.out_dir.empty()) ro.dir = (fs::path(options.out_dir) / "runs" / spec.id()).string();
    ro.resume = options.resume;
    ro.factory = options.factory;
    try {
      records[static_cast<std::size_t>(i)] = run_experiment(config, scenario, spec, ro);
    } catch (const std::exception& e) {
      RunRecord r;
      r.spec = spec;
      r.fingerprint = config.fingerprint();
      r.error = e.what();
      if (!ro.dir.empty() && fs::is_directory(ro.dir)) {
        try {
          write_run_meta(ro.dir, r, "failed");
        } catch (const std::exception&) {
        }
      }
      records[static_cast<std::size_t>(i)] = std::move(r);
    }
  }
  return records;
}

namespace {

std::string pair_key(const RunSpec& s) { return std::string(to_string(s.sampler)) + "__" + std::to_string(s.seed); }

}  // namespace

Aggregate aggregate(const std::vector<RunRecord>& records, std::size_t fairness_window, std::size_t expected) {
  Aggregate agg;
  agg.expected = expected ? expected : records.size();
  std::map<std::string, std::map<std::string, const RunRecord*>> by_policy;  // policy -> pair key -> run
  for (const auto& r : records) {
    if (!r.ok()) {
      agg.warnings.push_back("run " + r.spec.id() + " failed: " + *r.error);
      continue;
    }
    by_policy[r.spec.policy][pair_key(r.spec)] = &r;
    ++agg.completed;
  }
  std::sort(agg.warnings.begin(), agg.warnings.end());
  if (agg.completed < agg.expected)
    agg.warnings.push_back("aggregate covers " + std::to_string(agg.completed) + " of " +
                           std::to_string(agg.expected) + " runs");

  for (const auto& [policy, runs] : by_policy) {
    PolicyCurve c;
    c.policy = policy;
    std::size_t len = SIZE_MAX;
    for (const auto& [key, r] : runs) {
      c.run_ids.push_back(key);
      c.runs.push_back(r->regret_curve());
      len = std::min(len, c.runs.back().size());
    }
    for (const auto& run : c.runs)
      if (run.size() != len) {
        agg.warnings.push_back("policy " + policy + ": runs differ in length; curves cut to " +
                               std::to_string(len) + " steps");
        break;
      }
    for (std::size_t t = 0; t < len; ++t) {
      std::vector<double> col;
      for (const auto& run : c.runs) col.push_back(run[t]);
      c.mean.push_back(blp::mean(col));
      c.std.push_back(sample_std(col));
    }
    agg.curves.push_back(std::move(c));

    // Pooled group counts per step.
    const std::string attribute = runs.begin()->second->group_attribute;
    if (!attribute.empty()) {
      std::vector<std::map<std::string, ConfusionCounts>> pooled(len);
      for (const auto& [key, r] : runs)
        for (std::size_t t = 0; t < len && t < r->group_counts.size(); ++t)
          for (const auto& [g, cc] : r->group_counts[t]) pooled[t][g] += cc;
      std::set<std::string> groups;
      for (const auto& m : pooled)
        for (const auto& [g, _] : m) groups.insert(g);
      if (groups.size() >= 2) agg.fairness.emplace_back(policy, fairness_report(pooled, attribute, fairness_window));
    }
  }

  for (auto a = by_policy.begin(); a != by_policy.end(); ++a)
    for (auto b = std::next(a); b != by_policy.end(); ++b) {
      PairedComparison pc;
      pc.a = a->first;
      pc.b = b->first;
      std::vector<const RunRecord*> ra, rb;
      for (const auto& [key, r] : a->second)
        if (auto it = b->second.find(key); it != b->second.end()) {
          ra.push_back(r);
          rb.push_back(it->second);
        }
      pc.n = ra.size();
      if (pc.n == 0) continue;
      std::vector<double> fa, fb, d;
      std::size_t len = SIZE_MAX;
      for (std::size_t i = 0; i < pc.n; ++i) {
        fa.push_back(ra[i]->final_regret());
        fb.push_back(rb[i]->final_regret());
        d.push_back(fa.back() - fb.back());
        len = std::min({len, ra[i]->steps.size(), rb[i]->steps.size()});
      }
      pc.mean_diff = blp::mean(d);
      if (pc.n >= 2) {
        try {
          pc.t = paired_t(fa, fb);
        } catch (const NumericError&) {
        }
        for (std::size_t t = 0; t < len; ++t) {
          std::vector<double> dt;
          for (std::size_t i = 0; i < pc.n; ++i) dt.push_back(ra[i]->steps[t].cum_regret - rb[i]->steps[t].cum_regret);
          pc.ci_by_step.push_back(mean_ci(dt));
        }
      }
      agg.comparisons.push_back(std::move(pc));
    }
  return agg;
}

void write_regret_curves(std::ostream& out, const std::vector<PolicyCurve>& curves) {
  std::set<std::string> id_set;
  for (const auto& c : curves) id_set.insert(c.run_ids.begin(), c.run_ids.end());
  const std::vector<std::string> ids(id_set.begin(), id_set.end());
  std::vector<std::string> header = {"step", "policy", "mean", "std"};
  header.insert(header.end(), ids.begin(), ids.end());
  csv::write_row(out, header);
  for (const auto& c : curves)
    for (std::size_t t = 0; t < c.mean.size(); ++t) {
      std::vector<std::string> row = {std::to_string(t + 1), c.policy, csv::format_double(c.mean[t]),
                                      csv::format_double(c.std[t])};
      for (const auto& id : ids) {
        const auto it = std::find(c.run_ids.begin(), c.run_ids.end(), id);
        row.push_back(it == c.run_ids.end() ? std::string()
                                            : csv::format_double(c.runs[it - c.run_ids.begin()][t]));
      }
      csv::write_row(out, row);
    }
}

std::vector<PolicyCurve> read_regret_curves(std::istream& in) {
  csv::Table t = csv::read_table(in);
  const std::size_t c_step = t.column("step"), c_pol = t.column("policy"), c_mean = t.column("mean"),
                    c_std = t.column("std");
  std::vector<std::size_t> run_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (i != c_step && i != c_pol && i != c_mean && i != c_std) run_cols.push_back(i);
  std::vector<PolicyCurve> curves;
  for (const auto& r : t.rows) {
    if (curves.empty() || curves.back().policy != r[c_pol]) {
      PolicyCurve c;
      c.policy = r[c_pol];
      for (std::size_t col : run_cols)
        if (!r[col].empty()) c.run_ids.push_back(t.header[col]);
      c.runs.resize(c.run_ids.size());
      curves.push_back(std::move(c));
    }
    auto& c = curves.back();
    if (std::stoul(r[c_step]) != c.mean.size() + 1) throw DataError("regret_curves.csv: steps out of order");
    c.mean.push_back(csv::parse_double(r[c_mean]));
    c.std.push_back(csv::parse_double(r[c_std]));
    for (std::size_t k = 0; k < c.run_ids.size(); ++k)
      c.runs[k].push_back(csv::parse_double(r[t.column(c.run_ids[k])]));
  }
  return curves;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw DataError("write failed on " + p.string());
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

void emit_reports(const std::vector<RunRecord>& records, const std::string& out_dir, std::size_t fairness_window,
                  std::size_t expected) {
  if (records.empty()) throw PreconditionError("emit_reports: no run records");
  const Aggregate agg = aggregate(records, fairness_window, expected);
  if (agg.curves.empty()) throw PreconditionError("emit_reports: every run failed");
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  {
    const auto p = dir / "regret_curves.csv";
    auto out = open_out(p);
    write_regret_curves(out, agg.curves);
    close_out(out, p);
  }
  {
    // gnuplot: one block per policy, separated by two blank lines (index n).
    const auto p = dir / "regret_curves.dat";
    auto out = open_out(p);
    for (const auto& c : agg.curves) {
      out << "# policy " << c.policy << "\n# step mean std\n";
      for (std::size_t t = 0; t < c.mean.size(); ++t)
        out << t + 1 << ' ' << csv::format_double(c.mean[t]) << ' ' << csv::format_double(c.std[t]) << '\n';
      out << "\n\n";
    }
    close_out(out, p);
  }
  {
    const auto p = dir / "fairness.csv";
    auto out = open_out(p);
    write_fairness_csv_header(out, true);
    for (const auto& [policy, report] : agg.fairness) write_fairness_csv(out, report, &policy);
    close_out(out, p);
  }
  {
    const auto p = dir / "ci_difference.csv";
    auto out = open_out(p);
    csv::write_row(out, {"policy_a", "policy_b", "step", "mean", "lower", "upper"});
    for (const auto& pc : agg.comparisons)
      for (std::size_t t = 0; t < pc.ci_by_step.size(); ++t) {
        const auto& ci = pc.ci_by_step[t];
        csv::write_row(out, {pc.a, pc.b, std::to_string(t + 1), csv::format_double(ci.mean),
                             csv::format_double(ci.lower), csv::format_double(ci.upper)});
      }
    close_out(out, p);
  }
  {
    nlohmann::json j;
    j["expected_runs"] = agg.expected;
    j["completed_runs"] = agg.completed;
    j["warnings"] = agg.warnings;
    nlohmann::json pol = nlohmann::json::object();
    for (const auto& c : agg.curves) {
      std::vector<double> finals;
      for (const auto& r : c.runs) finals.push_back(r.empty() ? 0.0 : r.back());
      nlohmann::json e;
      e["runs"] = c.runs.size();
      e["final_regret_mean"] = blp::mean(finals);
      e["final_regret_std"] = sample_std(finals);
      if (finals.size() >= 2) {
        const auto ci = mean_ci(finals);
        e["final_regret_ci95"] = {ci.lower, ci.upper};
      }
      pol[c.policy] = e;
    }
    for (const auto& [policy, report] : agg.fairness) {
      const std::size_t T = report.steps();
      pol[policy]["fairness_attribute"] = report.attribute;
      pol[policy]["gap_smoothed_final_third"] = opt_json(mean_defined(report.gap_smoothed, 2 * T / 3, T));
    }
    j["policies"] = pol;
    nlohmann::json t = nlohmann::json::array();
    for (const auto& pc : agg.comparisons)
      t.push_back({{"a", pc.a}, {"b", pc.b}, {"n", pc.n}, {"mean_diff", pc.mean_diff}, {"t", opt_json(pc.t)}});
    j["paired_t"] = t;
    const auto p = dir / "stats.json";
    auto out = open_out(p);
    out << j.dump(2) << '\n';
    close_out(out, p);
  }
}

std::vector<RunRecord> read_runs(const std::string& dir) {
  const fs::path runs = fs::path(dir) / "runs";
  if (!fs::is_directory(runs)) throw DataError("no runs directory under " + dir);
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(runs))
    if (e.is_directory() && fs::exists(e.path() / "meta.ini")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<RunRecord> out;
  for (const auto& d : dirs) out.push_back(read_run_dir(d.string()));
  return out;
}

}  // namespace blp
