// One PASS/FAIL line per acceptance criterion. Usage: acceptance [ids...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "blp/adapt/triad.hpp"
#include "blp/env/regret.hpp"
#include "blp/errors.hpp"
#include "blp/env/stream.hpp"
#include "blp/harness/grid.hpp"
#include "blp/metrics/stats.hpp"
#include "blp/nn/gradcheck.hpp"
#include "blp/nn/loss.hpp"
#include "blp/rng.hpp"

using namespace blp;

namespace {

// Scenario configs live in configs/ at the source root.
ExperimentConfig scenario_config(const std::string& name) {
  return load_experiment_config(std::string(BLP_CONFIG_DIR) + "/" + name);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- AC1 ------------------------------------------------------------------

// Central differences on a random subset of coordinates of each block. A step
// of 1e-5 crosses ReLU kinks in the 100-wide stacks, so the step is 1e-6. The
// triad objective is a difference of two losses, so coordinates with
// gradients near 1e-8 are pure cancellation noise; the relative error is
// taken against max(|numeric|, 1e-6).
double sampled_check(const std::function<double()>& loss, std::vector<std::span<double>> params,
                     std::vector<std::span<const double>> grads, std::size_t per_block, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::span<double>> p;
  std::vector<std::span<const double>> g;
  for (std::size_t b = 0; b < params.size(); ++b) {
    const std::size_t n = params[b].size();
    for (std::size_t k = 0; k < std::min(per_block, n); ++k) {
      const std::size_t i = per_block >= n ? k : uniform_index(rng, n);
      p.push_back(params[b].subspan(i, 1));
      g.push_back(grads[b].subspan(i, 1));
    }
  }
  return compare_with_central_differences(loss, p, g, {.step = 1e-6, .floor = 1e-6});
}

Outcome ac1() {
  double worst = 0.0;
  std::size_t archs = 0;
  // Plain networks of varying depth and head.
  const std::vector<std::pair<std::vector<std::size_t>, Activation>> nets = {
      {{2, 40, 40, 1}, Activation::sigmoid},
      {{5, 7, 3, 1}, Activation::sigmoid},
      {{3, 6, 6, 6, 2}, Activation::identity},
      {{2, 100, 100, 1}, Activation::sigmoid}};
  for (std::size_t k = 0; k < nets.size(); ++k) {
    auto p = make_mlp(nets[k].first, nets[k].second, 100 + k);
    Rng rng(200 + k);
    Matrix x(6, nets[k].first.front());
    for (double& v : x.flat()) v = standard_normal(rng);
    std::vector<double> y(6);
    for (double& v : y) v = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    const double e = finite_diff_check(p, x, y);
    if (std::getenv("BLP_VERBOSE")) std::fprintf(stderr, "net %zu: %.3e\n", k, e);
    worst = std::max(worst, e);
    ++archs;
  }
  // The full-size triad: generator + classifier objective and discriminator objective.
  for (std::uint64_t seed : {0u, 1u}) {
    auto triad = make_triad(2, TriadConfig{}, seed);
    Rng rng(300 + seed);
    Matrix sx(6, 2), tx(5, 2);
    for (double& v : sx.flat()) v = standard_normal(rng);
    for (double& v : tx.flat()) v = standard_normal(rng) + 1.0;
    std::vector<double> sy = {1, 0, 1, 1, 0, 0};
    auto g = generator_step_gradients(triad, sx, sy, tx);
    auto params = parameter_blocks(triad.generator);
    auto cp = parameter_blocks(triad.classifier);
    params.insert(params.end(), cp.begin(), cp.end());
    auto grads = gradient_blocks(g.generator);
    auto cg = gradient_blocks(g.classifier);
    grads.insert(grads.end(), cg.begin(), cg.end());
    worst = std::max(worst, sampled_check([&] { return generator_objective(triad, sx, sy, tx); }, params, grads,
                                          400, seed));
    if (std::getenv("BLP_VERBOSE")) std::fprintf(stderr, "gen+cls %llu: %.3e\n", (unsigned long long)seed, worst);
    auto d = discriminator_step_gradients(triad, sx, tx);
    worst = std::max(worst,
                     sampled_check([&] { return discriminator_step_gradients(triad, sx, tx).loss; },
                                   parameter_blocks(triad.discriminator), gradient_blocks(d.discriminator), 400, seed));
    archs += 2;
  }
  return {worst < 1e-4, std::to_string(archs) + " architectures, max rel err " + fmt("%.2e", worst)};
}

// ---- AC2 ------------------------------------------------------------------

Outcome ac2() {
  SyntheticSpec spec{.n = 3000, .dim = 3, .theta = {1.0, -2.0, 0.5}, .seed = 9};
  auto data = std::make_shared<const EncodedDataset>(make_synthetic(spec));
  std::size_t exact = 0, logs = 100;
  for (std::size_t k = 0; k < logs; ++k) {
    Rng rng(derive_seed(77, {std::to_string(k)}));
    const std::size_t batch = 1 + uniform_index(rng, 32);
    const std::size_t steps = 1 + uniform_index(rng, 1000 / batch);
    Stream s(data, {.batch_size = batch, .horizon = steps, .sampler = kAllSamplers[k % 5], .seed = k});
    RegretTrace empirical, oracle;
    std::vector<DecisionTraceRow> rows;
    double misclassified = 0.0, brute_oracle = 0.0;
    bool same = true;
    while (auto b = s.next_batch()) {
      std::vector<int> d(b->size());
      for (int& v : d) v = uniform01(rng) < 0.5;
      const auto ie = step_regret(*b, d, OracleAccess::grant(), RegretForm::empirical);
      empirical.add(ie);
      oracle.add(step_regret(*b, d, OracleAccess::grant(), RegretForm::oracle));
      double step_oracle = 0.0;
      for (std::size_t i = 0; i < b->size(); ++i) {
        const std::size_t r = b->points[i].dataset_index();
        const double y = data->y[r], rho = data->oracle_prob[r];
        misclassified += (d[i] == 1 && y == 0.0) || (d[i] == 0 && y == 1.0);
        const double margin = 2.0 * rho - 1.0;
        step_oracle += (margin > 0.0 ? margin : 0.0) - d[i] * margin;
        rows.push_back({b->step, i, d[i], std::nullopt, ie[i]});
      }
      brute_oracle += step_oracle;
      same = same && oracle.total() == brute_oracle;
    }
    std::stringstream csv;
    write_decision_trace_header(csv);
    write_decision_trace(csv, rows);
    double replayed = 0.0;
    for (const auto& r : read_decision_trace(csv)) replayed += r.regret_increment;
    same = same && empirical.total() == misclassified && replayed == misclassified;
    exact += same;
  }
  return {exact == logs, std::to_string(exact) + "/" + std::to_string(logs) + " logs exact"};
}

// ---- AC3 ------------------------------------------------------------------

Outcome ac3() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    Rng rng(derive_seed(3, {std::to_string(k)}));
    const std::size_t d = 1 + uniform_index(rng, 6), n = 1 + uniform_index(rng, 40);
    std::vector<std::size_t> layers = {d};
    for (std::size_t h = uniform_index(rng, 3); h > 0; --h) layers.push_back(1 + uniform_index(rng, 12));
    layers.push_back(1);
    auto net = make_mlp(layers, Activation::sigmoid, k);
    Matrix x(n, d);
    for (double& v : x.flat()) v = 2.0 * standard_normal(rng);
    std::vector<double> y(n);
    for (double& v : y) v = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    const auto p = mlp_predict(net, x);
    double eq2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q = std::clamp(p[i], kProbClip, 1.0 - kProbClip);
      eq2 += -(y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q));
    }
    const double got = pseudo_label_loss(net, x, y, Matrix(0, d));
    worst = std::max(worst, std::abs(got - eq2) / std::max(1.0, std::abs(eq2)));
  }
  return {worst <= 1e-13, "1000 instances, max rel diff " + fmt("%.1e", worst)};
}

// ---- AC4 ------------------------------------------------------------------

Outcome ac4() {
  std::size_t ok = 0;
  std::ostringstream gaps;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // x2 copies x1 in the source and is shifted by 3 in the target; y depends on x1 only.
    Rng rng(seed);
    auto draw = [&](std::size_t n, double shift, std::vector<double>* y) {
      Matrix m(n, 2);
      for (std::size_t i = 0; i < n; ++i) {
        m(i, 0) = standard_normal(rng);
        m(i, 1) = m(i, 0) + shift;
        if (y) y->push_back(m(i, 0) > 0.0 ? 1.0 : 0.0);
      }
      return m;
    };
    DomainPair pair;
    pair.source_x = draw(500, 0.0, &pair.source_y);
    pair.target_x = draw(500, 3.0, nullptr);
    TriadConfig cfg;
    auto adv = make_triad(2, cfg, seed);
    cfg.lambda = 0.0;
    auto ctl = make_triad(2, cfg, seed);
    adapt_train(adv, pair, 100, seed);
    adapt_train(ctl, pair, 100, seed);
    const double ga = diagnose(adv, pair).parity_gap, gc = diagnose(ctl, pair).parity_gap;
    ok += ga <= 0.1 && gc > 0.3;
    gaps << fmt(" %.2f", ga) << "/" << fmt("%.2f", gc);
  }
  return {ok >= 8, std::to_string(ok) + "/10 seeds; adversarial/control gaps" + gaps.str()};
}

// ---- AC5 ------------------------------------------------------------------

// Greedy acceptance for `steps` batches of the lock-in world, then the biased
// model and a freshly adapted triad score the next `eval_batches` batches.
struct RecallLift {
  double biased_recall, debiased_recall, biased_ppr, debiased_ppr, biased_precision, debiased_precision;
};

RecallLift recall_lift(std::uint64_t seed, std::size_t steps, std::size_t eval_batches, std::size_t epochs) {
  const auto config = scenario_config("lockin.ini");
  const auto sc = load_scenario(config.dataset);
  PolicyConfig pc = config.policy;
  pc.seed = seed;
  auto greedy = make_policy("greedy", pc, sc.data->dim());
  StreamConfig scfg{.batch_size = config.batch_size, .horizon = steps + eval_batches,
                    .seed = stream_seed(config.master_seed, Sampler::uniform, seed), .lead_in = sc.lead_in};
  Stream stream(sc.data, scfg);
  AcceptedSet accepted;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto b = stream.next_batch();
    const Matrix x = b->features();
    const StepInput in{b->step, x, accepted};
    const auto d = greedy->decide(in);
    accepted.apply_decisions(*b, d.accept);
    greedy->observe(in, d);
  }
  Matrix eval_x;
  std::vector<double> eval_y;
  std::vector<int> biased;
  for (std::size_t k = 0; k < eval_batches; ++k) {
    const auto b = stream.next_batch();
    const Matrix x = b->features();
    // Decide only; the evaluation batches never reach the accepted set.
    const auto d = greedy->decide({b->step, x, accepted});
    biased.insert(biased.end(), d.accept.begin(), d.accept.end());
    eval_x.append_rows(x);
    for (const auto& p : b->points) eval_y.push_back(p.true_label(OracleAccess::grant()));
  }
  TriadConfig tc;  // library defaults, uncapped epochs
  auto triad = make_triad(sc.data->dim(), tc, derive_seed(seed, {"ac5"}));
  const auto pair = make_domain_pair(accepted.features(), accepted.labels(), eval_x, tc.source_cap, seed);
  adapt_train(triad, pair, epochs, seed);
  const auto probs = debiased_predict(triad, eval_x);
  std::vector<int> debiased;
  for (double p : probs) debiased.push_back(p >= 0.5);
  const auto cb = confusion(biased, eval_y), cd = confusion(debiased, eval_y);
  return {cb.recall().value_or(0),
          cd.recall().value_or(0),
          cb.predicted_positive_rate().value_or(0),
          cd.predicted_positive_rate().value_or(0),
          cb.precision().value_or(0),
          cd.precision().value_or(0)};
}

Outcome ac5() {
  double br = 0, dr = 0, bp = 0, dp = 0, bq = 0, dq = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = recall_lift(seed, 200, 20, 10);
    if (std::getenv("BLP_VERBOSE"))
      std::fprintf(stderr, "seed %llu recall %.3f -> %.3f ppr %.3f -> %.3f\n", (unsigned long long)seed,
                   r.biased_recall, r.debiased_recall, r.biased_ppr, r.debiased_ppr);
    br += r.biased_recall / 10;
    dr += r.debiased_recall / 10;
    bp += r.biased_ppr / 10;
    dp += r.debiased_ppr / 10;
    bq += r.biased_precision / 10;
    dq += r.debiased_precision / 10;
  }
  return {dr - br >= 0.1 && dp - bp >= 0.2, "recall " + fmt("%.3f", br) + " -> " + fmt("%.3f", dr) +
                                                ", predicted-positive rate " + fmt("%.3f", bp) + " -> " +
                                                fmt("%.3f", dp) + ", precision " + fmt("%.3f", bq) + " -> " +
                                                fmt("%.3f", dq) + " (biased -> de-biased, 10-seed means)"};
}

// ---- AC6 / AC7 / AC10 -----------------------------------------------------

using RecordsByPolicy = std::map<std::string, std::vector<RunRecord>>;  // seed order

RecordsByPolicy run_policies(const ExperimentConfig& base, const std::vector<std::string>& policies) {
  auto c = base;
  c.policies = policies;
  const auto sc = load_scenario(c.dataset);
  RecordsByPolicy out;
  for (auto& r : run_grid(c, sc)) {
    if (!r.ok()) throw StateError("run " + r.spec.id() + " failed: " + *r.error);
    out[r.spec.policy].push_back(std::move(r));
  }
  return out;
}

RecordsByPolicy& lockin_runs() {
  static RecordsByPolicy runs;
  return runs;
}

Outcome ac6() {
  const auto config = scenario_config("lockin.ini");
  auto& runs = lockin_runs();
  for (auto& [p, rs] : run_policies(config, {"greedy", "adopt"})) runs[p] = std::move(rs);
  const std::size_t T = config.horizon, half = T / 2;
  const double slope_min = 0.3 * static_cast<double>(config.batch_size);
  std::size_t ok = 0;
  std::ostringstream detail;
  for (std::size_t k = 0; k < config.seeds.size(); ++k) {
    const auto& g = runs["greedy"][k];
    const auto& a = runs["adopt"][k];
    const double slope = (g.steps[T - 1].cum_regret - g.steps[half - 1].cum_regret) / static_cast<double>(T - half);
    const double ratio = a.final_regret() / g.final_regret();
    ok += slope >= slope_min && ratio <= 0.5;
    detail << fmt(" %.1f", slope) << "/" << fmt("%.2f", ratio);
  }
  return {ok >= 8, std::to_string(ok) + "/10 seeds; greedy slope/AdOpt ratio" + detail.str()};
}

Outcome ac7() {
  const auto config = scenario_config("lockin.ini");
  auto& runs = lockin_runs();
  for (const char* p : {"greedy", "adopt"})
    if (runs[p].empty()) runs[p] = std::move(run_policies(config, {p})[p]);
  runs["plot"] = std::move(run_policies(config, {"plot"})["plot"]);
  std::map<std::string, std::vector<double>> finals;
  for (const auto& [p, rs] : runs)
    for (const auto& r : rs) finals[p].push_back(r.final_regret());
  const double ma = mean(finals["adopt"]), mp = mean(finals["plot"]), mg = mean(finals["greedy"]);
  const double t = paired_t(finals["plot"], finals["adopt"]);
  return {ma <= mp && mp <= mg && t > 2.0, "mean final regret AdOpt " + fmt("%.1f", ma) + ", PLOT " + fmt("%.1f", mp) +
                                               ", greedy " + fmt("%.1f", mg) + "; paired t(PLOT, AdOpt) = " +
                                               fmt("%.2f", t)};
}

Outcome ac10() {
  const auto config = scenario_config("minority.ini");
  auto runs = run_policies(config, {"greedy", "adversarial", "plot", "adopt"});
  const std::size_t T = config.horizon;
  auto final_third = [&](const RunRecord& r) {
    const auto report = r.fairness(config.fairness_window);
    return mean_defined(report.gap_smoothed, 2 * T / 3, T).value_or(std::nan(""));
  };
  std::size_t ok = 0;
  std::ostringstream detail;
  for (std::size_t k = 0; k < config.seeds.size(); ++k) {
    const double g = final_third(runs["greedy"][k]), adv = final_third(runs["adversarial"][k]);
    const double pl = final_third(runs["plot"][k]), ad = final_third(runs["adopt"][k]);
    ok += adv < g && ad < pl;
    detail << fmt(" %.2f", adv) << "<" << fmt("%.2f", g) << "," << fmt("%.2f", ad) << "<" << fmt("%.2f", pl);
  }
  return {ok >= 7, std::to_string(ok) + "/10 seeds; adversarial<greedy, AdOpt<PLOT gaps" + detail.str()};
}

// ---- AC8 / AC9 ------------------------------------------------------------

Outcome ac8() {
  bool monotone = true;
  for (std::size_t t = 1; t < 5000; ++t) monotone = monotone && eps_schedule(0.05, t + 1) <= eps_schedule(0.05, t);
  const double e = eps_schedule(0.05, 2500);
  return {e == 0.001 && monotone, "eps_2500 = " + fmt("%.17g", e) + (monotone ? ", monotone" : ", NOT monotone")};
}

Outcome ac9() {
  const std::vector<double> d = {1, 2, 3}, zero = {0, 0, 0};
  const double t = paired_t(d, zero);
  const std::vector<double> two = {0.0, 1.0};
  const double hw = mean_ci(two).half_width();
  return {std::abs(t - 3.4641) <= 1e-4 && std::abs(hw - 6.353) <= 0.01,
          "t = " + fmt("%.6f", t) + ", half-width of {0, 1} = " + fmt("%.4f", hw)};
}

// ---- AC11 -----------------------------------------------------------------

Outcome ac11() {
  ExperimentConfig c;
  c.policies.assign(std::begin(kPolicyNames), std::end(kPolicyNames));
  c.samplers = {Sampler::uniform, Sampler::covariate};
  c.seeds = {0, 1};
  c.horizon = 15;
  c.batch_size = 16;
  c.dataset.kind = "synthetic";
  c.dataset.synthetic = {.n = 2000, .dim = 2, .theta = {2.0, -1.0}, .group = GroupSpec{}};
  c.policy.biased.max_points = 200;
  c.policy.triad.epochs_per_step = 2;
  c.policy.triad.max_minibatches_per_epoch = 2;
  const auto sc = load_scenario(c.dataset);
  const auto a = run_grid(c, sc, {.workers = 1});
  const auto b = run_grid(c, sc, {.workers = 4});
  const auto again = run_grid(c, sc, {.workers = 2});
  std::size_t same = 0, failed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same += a[i] == b[i] && a[i] == again[i];
    failed += !a[i].ok();
  }
  return {same == a.size() && failed == 0,
          std::to_string(same) + "/" + std::to_string(a.size()) + " runs identical across 1, 4, 2 workers"};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)();
};

}  // namespace

int main(int argc, char** argv) {
  const Criterion all[] = {
      {1, "gradient correctness", ac1},
      {2, "regret accounting oracle", ac2},
      {3, "pseudo-label loss reduction", ac3},
      {4, "demographic-parity convergence", ac4},
      {5, "recall-lift direction", ac5},
      {6, "false-reject escape", ac6},
      {7, "baseline ordering", ac7},
      {8, "eps schedule anchor", ac8},
      {9, "statistics unit oracle", ac9},
      {10, "fairness direction", ac10},
      {11, "determinism across worker counts", ac11},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("AC%-2d %s  %-34s %s (%.1fs)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
