#include "blp/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "blp/csv.hpp"
#include "blp/errors.hpp"
#include "blp/rng.hpp"

namespace blp {

ConfigTree parse_ini(std::istream& in) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ConfigTree tree;
  for (const auto& [section, body] : pt) {
    if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
    auto& sec = tree[section];
    for (const auto& [key, value] : body) sec[key] = value.get_value<std::string>();
  }
  return tree;
}

ConfigTree read_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_ini(in);
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return std::string(s.substr(a, b - a + 1));
}

// Written for an empty string inside a list, e.g. missing = "",?,NA
constexpr std::string_view kEmptyItem = "\"\"";

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (item == kEmptyItem)
      out.emplace_back();
    else if (!item.empty())
      out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

[[noreturn]] void bad(const std::string& where, const std::string& value, const char* what) {
  throw ConfigError(where + ": cannot parse '" + value + "' as " + what);
}

// Text <-> value conversions for every config field type.
std::string encode(const std::string& v) { return v; }
std::string encode(bool v) { return v ? "true" : "false"; }
std::string encode(double v) { return csv::format_double(v); }
std::string encode(std::size_t v) { return std::to_string(v); }
std::string encode(int v) { return std::to_string(v); }
std::string encode(char v) { return std::string(1, v); }
std::string encode(Sampler v) { return std::string(to_string(v)); }
std::string encode(RegretForm v) {
  return v == RegretForm::oracle ? "oracle" : v == RegretForm::empirical ? "empirical" : "auto";
}
template <class T>
std::string encode(const std::vector<T>& v) {
  std::vector<std::string> parts;
  for (const auto& e : v) {
    parts.push_back(encode(e));
    if (parts.back().empty()) parts.back() = kEmptyItem;
  }
  return join(parts);
}
template <class T>
std::string encode(const std::optional<T>& v) {
  return v ? encode(*v) : "none";
}

void decode(const std::string& s, const std::string&, std::string& out) { out = s; }
void decode(const std::string& s, const std::string& where, bool& out) {
  const std::string l = lower(trim(s));
  if (l == "true" || l == "1" || l == "yes" || l == "on")
    out = true;
  else if (l == "false" || l == "0" || l == "no" || l == "off")
    out = false;
  else
    bad(where, s, "a boolean");
}
void decode(const std::string& s, const std::string& where, double& out) {
  try {
    std::size_t pos = 0;
    const std::string t = trim(s);
    out = std::stod(t, &pos);
    if (pos != t.size()) bad(where, s, "a number");
  } catch (const std::logic_error&) {
    bad(where, s, "a number");
  }
}
void decode(const std::string& s, const std::string& where, std::size_t& out) {
  const std::string t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size()) bad(where, s, "a non-negative integer");
}
void decode(const std::string& s, const std::string& where, int& out) {
  const std::string t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size()) bad(where, s, "an integer");
}
void decode(const std::string& s, const std::string& where, char& out) {
  if (s == "\\t" || s == "tab") {
    out = '\t';
    return;
  }
  if (s.size() != 1) bad(where, s, "a single character");
  out = s[0];
}
void decode(const std::string& s, const std::string& where, Sampler& out) {
  auto v = parse_sampler(trim(s));
  if (!v) bad(where, s, "a sampler (uniform, stratified, drift, covariate, bootstrap)");
  out = *v;
}
void decode(const std::string& s, const std::string& where, RegretForm& out) {
  auto v = parse_regret_form(trim(s));
  if (!v) bad(where, s, "a regret form (auto, oracle, empirical)");
  out = *v;
}
template <class T>
void decode(const std::string& s, const std::string& where, std::vector<T>& out) {
  out.clear();
  for (const auto& part : split_list(s)) {
    T v{};
    decode(part, where, v);
    out.push_back(v);
  }
}
template <class T>
void decode(const std::string& s, const std::string& where, std::optional<T>& out) {
  if (lower(trim(s)) == "none" || trim(s).empty()) {
    out.reset();
    return;
  }
  T v{};
  decode(s, where, v);
  out = v;
}

class Writer {
 public:
  template <class T>
  void operator()(const char* section, const char* key, const T& v) {
    tree[section][key] = encode(v);
  }
  ConfigTree tree;
};

class Reader {
 public:
  explicit Reader(const ConfigTree& t) : tree_(t) {}
  template <class T>
  void operator()(const char* section, const char* key, T& v) {
    known_[section].insert(key);
    auto s = tree_.find(section);
    if (s == tree_.end()) return;
    auto k = s->second.find(key);
    if (k == s->second.end()) return;
    decode(k->second, std::string("[") + section + "] " + key, v);
  }
  void check_unknown(const std::set<std::string>& dynamic_prefixes) const {
    for (const auto& [section, keys] : tree_) {
      bool dynamic = false;
      for (const auto& p : dynamic_prefixes) dynamic |= section.rfind(p, 0) == 0;
      if (dynamic) continue;
      auto k = known_.find(section);
      if (k == known_.end()) throw ConfigError("config: unknown section [" + section + "]");
      for (const auto& [key, _] : keys)
        if (!k->second.count(key))
          throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

 private:
  const ConfigTree& tree_;
  std::map<std::string, std::set<std::string>> known_;
};

// Single list of every scalar field, shared by both directions.
template <class C, class V>
void visit_fields(C& c, V& v) {
  v("experiment", "policies", c.policies);
  v("experiment", "samplers", c.samplers);
  v("experiment", "master_seed", c.master_seed);
  v("experiment", "horizon", c.horizon);
  v("experiment", "batch_size", c.batch_size);
  v("experiment", "regret", c.regret);
  v("experiment", "oracle_metrics", c.oracle_metrics);
  v("experiment", "group_attribute", c.group_attribute);
  v("experiment", "fairness_window", c.fairness_window);
  v("experiment", "output", c.output);
  v("experiment", "checkpoint_every", c.checkpoint_every);
  v("experiment", "write_diagnostics", c.write_diagnostics);

  auto& d = c.dataset;
  v("dataset", "kind", d.kind);
  v("synthetic", "n", d.synthetic.n);
  v("synthetic", "dim", d.synthetic.dim);
  v("synthetic", "theta", d.synthetic.theta);
  v("synthetic", "bias", d.synthetic.bias);
  v("synthetic", "seed", d.synthetic.seed);
  v("csv", "path", d.path);
  v("csv", "delimiter", d.schema.delimiter);
  v("csv", "label_positive", d.schema.label_positive);
  v("csv", "missing", d.schema.missing_markers);
  v("csv", "negative_is_missing", d.schema.negative_is_missing);
  v("csv", "stats_rows", d.schema.stats_rows);
  v("idx", "images", d.images);
  v("idx", "labels", d.labels);
  v("idx", "positive_digit", d.idx.positive_digit);
  v("idx", "downsample", d.idx.downsample);
  v("idx", "limit", d.idx.limit);
  auto& tc = d.two_cluster;
  v("two_cluster", "n", tc.n);
  v("two_cluster", "fraction_b", tc.fraction_b);
  v("two_cluster", "logit_a", tc.logit_a);
  v("two_cluster", "slope_a_x1", tc.slope_a_x1);
  v("two_cluster", "slope_a_x2", tc.slope_a_x2);
  v("two_cluster", "logit_b", tc.logit_b);
  v("two_cluster", "spread", tc.spread);
  v("two_cluster", "lead_in_a", tc.lead_in_a);
  v("two_cluster", "lead_in_b_negatives", tc.lead_in_b_negatives);
  v("two_cluster", "group_a", tc.group_a);
  v("two_cluster", "group_b", tc.group_b);
  v("two_cluster", "seed", tc.seed);

  auto& s = c.stream;
  v("stream", "drift_p0", s.drift_p0);
  v("stream", "drift_p1", s.drift_p1);
  v("stream", "covariate_feature", s.covariate_feature);
  v("stream", "covariate_jitter_batches", s.covariate_jitter_batches);
  v("stream", "reshuffle", s.reshuffle);

  auto& b = c.policy.biased;
  v("biased", "hidden", b.hidden);
  v("biased", "learning_rate", b.adam.learning_rate);
  v("biased", "beta1", b.adam.beta1);
  v("biased", "beta2", b.adam.beta2);
  v("biased", "epsilon", b.adam.epsilon);
  v("biased", "epochs", b.epochs);
  v("biased", "batch_size", b.batch_size);
  v("biased", "max_points", b.max_points);
  v("biased", "warm_start", b.warm_start);

  auto& t = c.policy.triad;
  v("triad", "encoded_dim", t.encoded_dim);
  v("triad", "generator_hidden", t.generator_hidden);
  v("triad", "classifier_hidden", t.classifier_hidden);
  v("triad", "discriminator_hidden", t.discriminator_hidden);
  v("triad", "lr_generator", t.lr_generator);
  v("triad", "lr_classifier", t.lr_classifier);
  v("triad", "lr_discriminator", t.lr_discriminator);
  v("triad", "beta1", t.beta1);
  v("triad", "beta2", t.beta2);
  v("triad", "epochs", t.epochs_per_step);
  v("triad", "minibatch", t.minibatch);
  v("triad", "lambda", t.lambda);
  v("triad", "source_cap", t.source_cap);
  v("triad", "max_minibatches_per_epoch", t.max_minibatches_per_epoch);
  v("triad", "reset_weights", t.reset_weights);
  v("triad", "reset_moments", t.reset_moments);

  auto& p = c.policy;
  v("policy", "eps_c", p.eps_c);
  v("policy", "ucb_alpha", p.ucb_alpha);
  v("policy", "ucb_gamma", p.ucb_gamma);
  v("policy", "ucb_ridge", p.ucb_ridge);
  v("policy", "plot_eps", p.plot_eps);
  v("policy", "plot_decayed_eps", p.plot_decayed_eps);
  v("policy", "pseudo_epochs", p.pseudo_epochs);
  v("policy", "restrict_pseudo_accept_to_filtered", p.restrict_pseudo_accept_to_filtered);
}

// uint64 fields go through size_t on this platform.
static_assert(sizeof(std::size_t) == sizeof(std::uint64_t));

}  // namespace

ConfigTree ExperimentConfig::to_tree() const {
  Writer w;
  ExperimentConfig& self = const_cast<ExperimentConfig&>(*this);
  visit_fields(self, w);
  w("experiment", "seeds", seeds);
  w("synthetic", "group", dataset.synthetic.group ? std::to_string(dataset.synthetic.group->feature)
                                                  : std::string("none"));
  if (const auto& g = dataset.synthetic.group) {
    w("synthetic", "group_attribute", g->attribute);
    w("synthetic", "group_threshold", g->threshold);
    w("synthetic", "group_noise", g->noise);
    w("synthetic", "group_below", g->below);
    w("synthetic", "group_above", g->above);
  }
  for (std::size_t i = 0; i < dataset.synthetic.components.size(); ++i) {
    const auto& comp = dataset.synthetic.components[i];
    const std::string sec = "component." + std::to_string(i);
    w(sec.c_str(), "mean", comp.mean);
    w(sec.c_str(), "std", comp.std);
    w(sec.c_str(), "weight", comp.weight);
  }
  for (const auto& col : dataset.schema.columns) {
    std::string kind;
    switch (col.kind) {
      case ColumnKind::numeric: kind = "numeric"; break;
      case ColumnKind::categorical: kind = "categorical"; break;
      case ColumnKind::label: kind = "label"; break;
      case ColumnKind::group: kind = "group"; break;
      case ColumnKind::categorical_group: kind = "categorical_group"; break;
      case ColumnKind::drop: kind = "drop"; break;
    }
    w.tree["columns"][col.name] = kind;
  }
  for (const auto& [attr, m] : dataset.schema.group_maps)
    for (const auto& [from, to] : m) w.tree["group_map." + attr][from] = to;
  return w.tree;
}

ExperimentConfig ExperimentConfig::from_tree(const ConfigTree& tree) {
  ExperimentConfig c;
  Reader r(tree);
  visit_fields(c, r);
  r("experiment", "seeds", c.seeds);

  std::string group = "none";
  r("synthetic", "group", group);
  if (lower(trim(group)) != "none") {
    GroupSpec g;
    decode(group, "[synthetic] group", g.feature);
    r("synthetic", "group_attribute", g.attribute);
    r("synthetic", "group_threshold", g.threshold);
    r("synthetic", "group_noise", g.noise);
    r("synthetic", "group_below", g.below);
    r("synthetic", "group_above", g.above);
    c.dataset.synthetic.group = g;
  } else {
    std::string ignored;
    double ignored_d = 0;
    r("synthetic", "group_attribute", ignored);
    r("synthetic", "group_threshold", ignored_d);
    r("synthetic", "group_noise", ignored_d);
    r("synthetic", "group_below", ignored);
    r("synthetic", "group_above", ignored);
  }

  // [component.N] sections in numeric order.
  std::map<std::size_t, MixtureComponent> comps;
  for (const auto& [section, keys] : tree) {
    if (section.rfind("component.", 0) != 0) continue;
    std::size_t idx = 0;
    decode(section.substr(10), "[" + section + "]", idx);
    MixtureComponent m;
    for (const auto& [k, v] : keys) {
      const std::string where = "[" + section + "] " + k;
      if (k == "mean")
        decode(v, where, m.mean);
      else if (k == "std")
        decode(v, where, m.std);
      else if (k == "weight")
        decode(v, where, m.weight);
      else
        throw ConfigError("config: unknown key '" + k + "' in [" + section + "]");
    }
    comps[idx] = m;
  }
  if (!comps.empty()) {
    c.dataset.synthetic.components.clear();
    for (auto& [_, m] : comps) c.dataset.synthetic.components.push_back(m);
  }

  if (auto it = tree.find("columns"); it != tree.end())
    for (const auto& [name, kind] : it->second) {
      auto k = parse_column_kind(trim(kind));
      if (!k) throw ConfigError("config: column '" + name + "' has unknown kind '" + kind + "'");
      c.dataset.schema.columns.push_back({name, *k});
    }
  for (const auto& [section, keys] : tree)
    if (section.rfind("group_map.", 0) == 0)
      for (const auto& [from, to] : keys) c.dataset.schema.group_maps[section.substr(10)][from] = to;

  r.check_unknown({"component.", "columns", "group_map."});

  for (const auto& p : c.policies) {
    bool ok = false;
    for (auto n : kPolicyNames) ok |= n == p;
    if (!ok) throw ConfigError("config: unknown policy '" + p + "'");
  }
  if (c.policies.empty() || c.samplers.empty() || c.seeds.empty())
    throw ConfigError("config: policies, samplers and seeds each need at least one entry");
  if (c.horizon < 1 || c.batch_size < 1) throw ConfigError("config: horizon and batch_size must be >= 1");
  const std::set<std::string> kinds = {"synthetic", "csv", "idx", "two_cluster"};
  if (!kinds.count(c.dataset.kind)) throw ConfigError("config: unknown dataset kind '" + c.dataset.kind + "'");
  if (c.checkpoint_every < 1) throw ConfigError("config: checkpoint_every must be >= 1");
  return c;
}

std::string dump_ini(const ConfigTree& tree) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : tree) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [k, v] : keys) out << k << " = " << v << '\n';
  }
  return out.str();
}

std::string ExperimentConfig::fingerprint() const {
  std::uint64_t h = fnv1a("");
  for (const auto& [section, keys] : to_tree())
    for (const auto& [k, v] : keys) h = fnv1a(section + "." + k + "=" + v + "\n", h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void apply_env_overrides(ConfigTree& tree, const char* const* envp) {
  if (!envp) return;
  constexpr std::string_view prefix = "BLP__";
  for (const char* const* e = envp; *e; ++e) {
    std::string_view entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string_view name = entry.substr(prefix.size(), eq - prefix.size());
    const auto sep = name.find("__");
    if (sep == std::string_view::npos) throw ConfigError("env override " + std::string(name) + " lacks __KEY");
    std::string section = lower(std::string(name.substr(0, sep)));
    const std::string key = lower(std::string(name.substr(sep + 2)));
    for (const char* dyn : {"group_map_", "component_"})
      if (section.rfind(dyn, 0) == 0) section[std::strlen(dyn) - 1] = '.';
    tree[section][key] = std::string(entry.substr(eq + 1));
  }
}

ExperimentConfig load_experiment_config(const std::string& path, const char* const* envp) {
  ConfigTree tree = read_ini_file(path);
  apply_env_overrides(tree, envp);
  return ExperimentConfig::from_tree(tree);
}

}  // namespace blp
