#include "blp/harness/run.hpp"

#include <cereal/archives/binary.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/string.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blp/csv.hpp"
#include "blp/env/regret.hpp"
#include "blp/env/stream.hpp"
#include "blp/errors.hpp"
#include "blp/rng.hpp"

namespace fs = std::filesystem;

namespace blp {

std::string RunSpec::id() const {
  return policy + "__" + std::string(to_string(sampler)) + "__" + std::to_string(seed);
}

std::vector<double> RunRecord::regret_curve() const {
  std::vector<double> v;
  v.reserve(steps.size());
  for (const auto& s : steps) v.push_back(s.cum_regret);
  return v;
}

FairnessReport RunRecord::fairness(std::size_t window) const {
  return fairness_report(group_counts, group_attribute, window);
}

std::uint64_t stream_seed(std::uint64_t master, Sampler sampler, std::uint64_t seed) {
  return derive_seed(master, {"stream", to_string(sampler), std::to_string(seed)});
}

std::uint64_t policy_seed(std::uint64_t master, const RunSpec& spec) {
  return derive_seed(master, {"policy", spec.policy, to_string(spec.sampler), std::to_string(spec.seed)});
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }
std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return csv::parse_double(s);
}

const std::vector<std::string> kStepsHeader = {"step", "cum_regret", "regret", "accepts", "tp",
                                               "fp",   "fn",         "tn",     "parity_gap", "eps"};
const std::vector<std::string> kGroupsHeader = {"step", "group", "tp", "fp", "fn", "tn"};

struct Checkpoint {
  std::uint64_t step = 0;
  std::string run_id;
  std::string fingerprint;
  std::map<std::string, std::uint64_t> offsets;
  std::string policy_state;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(step, run_id, fingerprint, offsets, policy_state);
  }
};

const char* const kFiles[] = {"steps.csv", "decisions.csv", "groups.csv", "diagnostics.csv",
                              "adaptation.csv"};

void write_text_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError("cannot write " + p.string());
}

}  // namespace

void write_run_meta(const std::string& dir_str, const RunRecord& rec, const std::string& status) {
  const fs::path dir(dir_str);
  ConfigTree t;
  auto& run = t["run"];
  run["policy"] = rec.spec.policy;
  run["sampler"] = std::string(to_string(rec.spec.sampler));
  run["seed"] = std::to_string(rec.spec.seed);
  run["fingerprint"] = rec.fingerprint;
  run["group_attribute"] = rec.group_attribute;
  run["steps"] = std::to_string(rec.steps.size());
  run["status"] = status;
  if (rec.error) run["error"] = *rec.error;
  const fs::path tmp = dir / "meta.ini.tmp";
  write_text_file(tmp, dump_ini(t));
  fs::rename(tmp, dir / "meta.ini");
}

namespace {

Checkpoint read_checkpoint(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  Checkpoint c;
  try {
    cereal::BinaryInputArchive ar(in);
    ar(c);
  } catch (const cereal::Exception& e) {
    throw DataError("corrupt checkpoint " + p.string() + ": " + e.what());
  }
  return c;
}

void write_checkpoint(const fs::path& dir, const Checkpoint& c) {
  const fs::path tmp = dir / "checkpoint.bin.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    cereal::BinaryOutputArchive ar(out);
    ar(c);
  }
  fs::rename(tmp, dir / "checkpoint.bin");
}

std::string resolve_group_attribute(const ExperimentConfig& config, const EncodedDataset& data) {
  if (!config.group_attribute.empty()) {
    if (!data.group(config.group_attribute))
      throw ConfigError("group attribute '" + config.group_attribute + "' not present in the dataset");
    return config.group_attribute;
  }
  return data.groups.empty() ? std::string() : data.groups.front().attribute;
}

// Streams owned by one run directory.
struct Outputs {
  fs::path dir;
  std::map<std::string, std::ofstream> files;

  bool enabled() const { return !dir.empty(); }
  std::ostream& operator[](const std::string& name) { return files.at(name); }

  void open(bool append) {
    for (const char* f : kFiles) {
      auto mode = std::ios::binary | (append ? std::ios::app : std::ios::trunc);
      std::ofstream s(dir / f, mode);
      if (!s) throw DataError("cannot open " + (dir / f).string() + " for writing");
      files.emplace(f, std::move(s));
    }
  }
  std::map<std::string, std::uint64_t> flush_and_measure() {
    std::map<std::string, std::uint64_t> sizes;
    for (auto& [name, s] : files) {
      s.flush();
      if (!s) throw DataError("write failed on " + (dir / name).string());
      sizes[name] = fs::file_size(dir / name);
    }
    return sizes;
  }
};

}  // namespace

void write_steps_header(std::ostream& out) { csv::write_row(out, kStepsHeader); }

void write_step_row(std::ostream& out, const StepRecord& r) {
  csv::write_row(out, {std::to_string(r.step), csv::format_double(r.cum_regret), csv::format_double(r.regret),
                       std::to_string(r.accepts), std::to_string(r.counts.tp), std::to_string(r.counts.fp),
                       std::to_string(r.counts.fn), std::to_string(r.counts.tn), opt(r.parity_gap),
                       opt(r.eps)});
}

std::vector<StepRecord> read_steps(std::istream& in) {
  csv::Table t = csv::read_table(in);
  std::vector<std::size_t> c;
  for (const auto& h : kStepsHeader) c.push_back(t.column(h));
  std::vector<StepRecord> out;
  for (const auto& r : t.rows) {
    StepRecord s;
    s.step = std::stoul(r[c[0]]);
    s.cum_regret = csv::parse_double(r[c[1]]);
    s.regret = csv::parse_double(r[c[2]]);
    s.accepts = std::stoul(r[c[3]]);
    s.counts.tp = std::stoul(r[c[4]]);
    s.counts.fp = std::stoul(r[c[5]]);
    s.counts.fn = std::stoul(r[c[6]]);
    s.counts.tn = std::stoul(r[c[7]]);
    s.parity_gap = parse_opt(r[c[8]]);
    s.eps = parse_opt(r[c[9]]);
    out.push_back(s);
  }
  return out;
}

void write_groups_header(std::ostream& out) { csv::write_row(out, kGroupsHeader); }

void write_group_rows(std::ostream& out, std::size_t step, const std::map<std::string, ConfusionCounts>& m) {
  for (const auto& [g, cc] : m)
    csv::write_row(out, {std::to_string(step), g, std::to_string(cc.tp), std::to_string(cc.fp),
                         std::to_string(cc.fn), std::to_string(cc.tn)});
}

std::vector<std::map<std::string, ConfusionCounts>> read_groups(std::istream& in, std::size_t steps) {
  csv::Table t = csv::read_table(in);
  std::vector<std::size_t> c;
  for (const auto& h : kGroupsHeader) c.push_back(t.column(h));
  std::vector<std::map<std::string, ConfusionCounts>> out(steps);
  for (const auto& r : t.rows) {
    const std::size_t step = std::stoul(r[c[0]]);
    if (step < 1 || step > steps) throw DataError("groups.csv: step " + r[c[0]] + " out of range");
    ConfusionCounts cc;
    cc.tp = std::stoul(r[c[2]]);
    cc.fp = std::stoul(r[c[3]]);
    cc.fn = std::stoul(r[c[4]]);
    cc.tn = std::stoul(r[c[5]]);
    out[step - 1][r[c[1]]] = cc;
  }
  return out;
}

RunRecord run_experiment(const ExperimentConfig& config, const Scenario& scenario, const RunSpec& spec,
                         const RunOptions& options) {
  const EncodedDataset& data = *scenario.data;
  RunRecord rec;
  rec.spec = spec;
  rec.fingerprint = config.fingerprint();
  rec.resolved_config = config.resolved_ini();
  rec.group_attribute = resolve_group_attribute(config, data);

  PolicyConfig pcfg = config.policy;
  pcfg.seed = policy_seed(config.master_seed, spec);
  auto policy = options.factory ? options.factory(spec.policy, pcfg, data.dim())
                                : make_policy(spec.policy, pcfg, data.dim());
  if (!policy) throw ConfigError("policy factory returned nothing for '" + spec.policy + "'");

  StreamConfig scfg = config.stream;
  scfg.dataset_id = data.name;
  scfg.batch_size = config.batch_size;
  scfg.horizon = config.horizon;
  scfg.sampler = spec.sampler;
  scfg.seed = stream_seed(config.master_seed, spec.sampler, spec.seed);
  if (scfg.lead_in.empty()) scfg.lead_in = scenario.lead_in;
  Stream stream(scenario.data, scfg);
  AcceptedSet accepted;

  Outputs out;
  out.dir = options.dir;
  std::size_t start = 1;
  if (out.enabled()) {
    std::error_code ec;
    fs::create_directories(out.dir, ec);
    if (ec) throw DataError("cannot create " + out.dir.string() + ": " + ec.message());
    const fs::path ckpt_path = out.dir / "checkpoint.bin";
    if (options.resume && fs::exists(ckpt_path)) {
      const Checkpoint ck = read_checkpoint(ckpt_path);
      if (ck.run_id != spec.id() || ck.fingerprint != rec.fingerprint)
        throw StateError("checkpoint in " + out.dir.string() + " belongs to a different run or config");
      for (const auto& [name, size] : ck.offsets) fs::resize_file(out.dir / name, size);
      {
        std::ifstream s(out.dir / "steps.csv", std::ios::binary);
        rec.steps = read_steps(s);
      }
      {
        std::ifstream s(out.dir / "groups.csv", std::ios::binary);
        rec.group_counts = read_groups(s, rec.steps.size());
      }
      std::vector<std::vector<int>> decisions(ck.step);
      {
        std::ifstream s(out.dir / "decisions.csv", std::ios::binary);
        for (const auto& row : read_decision_trace(s)) {
          if (row.step < 1 || row.step > ck.step) throw DataError("decisions.csv: step out of range");
          decisions[row.step - 1].push_back(row.decision);
        }
      }
      if (rec.steps.size() != ck.step) throw DataError("steps.csv disagrees with the checkpoint");
      for (std::size_t t = 1; t <= ck.step; ++t) {
        auto batch = stream.next_batch();
        if (!batch) throw DataError("stream ended before the checkpointed step");
        accepted.apply_decisions(*batch, decisions[t - 1]);
      }
      std::istringstream state(ck.policy_state);
      policy->load(state);
      start = ck.step + 1;
      out.open(true);
    } else {
      out.open(false);
      write_steps_header(out["steps.csv"]);
      write_decision_trace_header(out["decisions.csv"]);
      write_groups_header(out["groups.csv"]);
      write_policy_diagnostics_header(out["diagnostics.csv"]);
      write_adaptation_header(out["adaptation.csv"]);
      write_text_file(out.dir / "config.ini", rec.resolved_config);
      fs::remove(ckpt_path);
    }
    write_run_meta(out.dir.string(), rec, "running");
  }

  const OracleAccess oracle = OracleAccess::grant();
  double cum = rec.steps.empty() ? 0.0 : rec.steps.back().cum_regret;
  for (std::size_t t = start; t <= config.horizon; ++t) {
    auto batch = stream.next_batch();
    if (!batch) break;
    const Matrix x = batch->features();
    const StepInput in{batch->step, x, accepted};
    PolicyDecision d = policy->decide(in);
    if (d.accept.size() != batch->size())
      throw StateError("policy " + spec.policy + " returned " + std::to_string(d.accept.size()) +
                       " decisions for a batch of " + std::to_string(batch->size()));
    const auto revealed = accepted.apply_decisions(*batch, d.accept);
    policy->observe(in, d);
    const std::vector<double> inc = step_regret(*batch, d.accept, oracle, config.regret);

    StepRecord sr;
    sr.step = batch->step;
    for (double v : inc) sr.regret += v;
    cum += sr.regret;
    sr.cum_regret = cum;
    std::map<std::string, ConfusionCounts> groups;
    std::map<std::string, std::pair<std::size_t, std::size_t>> group_accepts;
    for (std::size_t i = 0; i < batch->size(); ++i) {
      const auto& p = batch->points[i];
      sr.accepts += d.accept[i] ? 1 : 0;
      std::optional<double> label;
      if (config.oracle_metrics)
        label = p.true_label(oracle);
      else
        label = revealed[i];
      if (label) sr.counts.add(d.accept[i], *label);
      if (!rec.group_attribute.empty()) {
        const std::string& g = p.group_tags().at(rec.group_attribute);
        if (label) groups[g].add(d.accept[i], *label);
        auto& ga = group_accepts[g];
        ga.first += d.accept[i] ? 1 : 0;
        ga.second += 1;
      }
    }
    if (group_accepts.size() >= 2) {
      double lo = 1.0, hi = 0.0;
      for (const auto& [g, ga] : group_accepts) {
        const double r = static_cast<double>(ga.first) / static_cast<double>(ga.second);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      sr.parity_gap = hi - lo;
    }
    for (const auto& diag : d.diagnostics)
      if (diag.eps) {
        sr.eps = diag.eps;
        break;
      }
    rec.steps.push_back(sr);
    rec.group_counts.push_back(groups);

    if (out.enabled()) {
      write_step_row(out["steps.csv"], sr);
      std::vector<DecisionTraceRow> rows;
      for (std::size_t i = 0; i < batch->size(); ++i) rows.push_back({sr.step, i, d.accept[i], revealed[i], inc[i]});
      write_decision_trace(out["decisions.csv"], rows);
      write_group_rows(out["groups.csv"], sr.step, groups);
      if (config.write_diagnostics) write_policy_diagnostics(out["diagnostics.csv"], sr.step, d);
      if (d.adaptation) write_adaptation_row(out["adaptation.csv"], sr.step, *d.adaptation);
    }
    if (options.stop_after && t == *options.stop_after) {
      if (out.enabled()) out.flush_and_measure();
      return rec;
    }
    if (out.enabled() && (t % config.checkpoint_every == 0 || t == config.horizon)) {
      Checkpoint ck;
      ck.step = t;
      ck.run_id = spec.id();
      ck.fingerprint = rec.fingerprint;
      ck.offsets = out.flush_and_measure();
      std::ostringstream state;
      policy->save(state);
      ck.policy_state = state.str();
      write_checkpoint(out.dir, ck);
    }
  }
  if (out.enabled()) {
    out.flush_and_measure();
    write_run_meta(out.dir.string(), rec, "complete");
  }
  return rec;
}

RunRecord read_run_dir(const std::string& dir_str) {
  const fs::path dir(dir_str);
  const ConfigTree meta = read_ini_file((dir / "meta.ini").string());
  const auto it = meta.find("run");
  if (it == meta.end()) throw DataError("meta.ini in " + dir_str + " has no [run] section");
  const auto& run = it->second;
  auto get = [&](const std::string& k) {
    auto v = run.find(k);
    if (v == run.end()) throw DataError("meta.ini in " + dir_str + " lacks " + k);
    return v->second;
  };
  RunRecord rec;
  rec.spec.policy = get("policy");
  auto sampler = parse_sampler(get("sampler"));
  if (!sampler) throw DataError("meta.ini: bad sampler");
  rec.spec.sampler = *sampler;
  rec.spec.seed = std::stoull(get("seed"));
  rec.fingerprint = get("fingerprint");
  rec.group_attribute = run.count("group_attribute") ? run.at("group_attribute") : "";
  const std::string status = run.count("status") ? run.at("status") : "unknown";
  if (run.count("error"))
    rec.error = run.at("error");
  else if (status != "complete")
    rec.error = "run did not complete (status " + status + ")";
  {
    std::ifstream in(dir / "config.ini", std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    rec.resolved_config = s.str();
  }
  {
    std::ifstream in(dir / "steps.csv", std::ios::binary);
    if (!in) throw DataError("cannot open " + (dir / "steps.csv").string());
    rec.steps = read_steps(in);
  }
  {
    std::ifstream in(dir / "groups.csv", std::ios::binary);
    if (!in) throw DataError("cannot open " + (dir / "groups.csv").string());
    rec.group_counts = read_groups(in, rec.steps.size());
  }
  return rec;
}

}  // namespace blp
