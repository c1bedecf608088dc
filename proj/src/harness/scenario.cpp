#include "blp/harness/scenario.hpp"

#include <cmath>

#include "blp/data/csv_loader.hpp"
#include "blp/data/idx_loader.hpp"
#include "blp/data/synthetic.hpp"
#include "blp/errors.hpp"
#include "blp/rng.hpp"

namespace blp {

Scenario make_two_cluster(const TwoClusterSpec& spec) {
  if (spec.n == 0) throw PreconditionError("two_cluster: n must be positive");
  if (!(spec.fraction_b > 0.0 && spec.fraction_b < 1.0))
    throw PreconditionError("two_cluster: fraction_b must lie in (0, 1)");
  Rng rng(derive_seed(spec.seed, {"two_cluster"}));
  auto ds = std::make_shared<EncodedDataset>();
  ds->name = "two_cluster";
  ds->x = Matrix(spec.n, 2);
  GroupColumn g{"cluster", {spec.group_a, spec.group_b}, {}};
  if (spec.group_a >= spec.group_b) std::swap(g.levels[0], g.levels[1]);
  const std::size_t code_a = spec.group_a < spec.group_b ? 0 : 1;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool b = uniform01(rng) < spec.fraction_b;
    const double x1 = (b ? 2.0 : -2.0) + spec.spread * standard_normal(rng);
    const double x2 = standard_normal(rng);
    ds->x(i, 0) = x1;
    ds->x(i, 1) = x2;
    const double z = b ? spec.logit_b : spec.logit_a - spec.slope_a_x1 * (x1 + 2.0) + spec.slope_a_x2 * x2;
    const double p = 1.0 / (1.0 + std::exp(-z));
    ds->oracle_prob.push_back(p);
    ds->y.push_back(uniform01(rng) < p ? 1.0 : 0.0);
    g.codes.push_back(b ? 1 - code_a : code_a);
  }
  ds->groups.push_back(std::move(g));

  Scenario sc;
  std::size_t na = 0, nb = 0;
  for (std::size_t i = 0; i < spec.n && (na < spec.lead_in_a || nb < spec.lead_in_b_negatives); ++i) {
    const bool b = ds->groups[0].codes[i] != code_a;
    if (!b && na < spec.lead_in_a) {
      sc.lead_in.push_back(i);
      ++na;
    } else if (b && ds->y[i] == 0.0 && nb < spec.lead_in_b_negatives) {
      sc.lead_in.push_back(i);
      ++nb;
    }
  }
  if (na < spec.lead_in_a || nb < spec.lead_in_b_negatives)
    throw DataError("two_cluster: not enough rows for the requested lead-in");
  sc.data = std::move(ds);
  return sc;
}

Scenario load_scenario(const DatasetConfig& config) {
  if (config.kind == "two_cluster") return make_two_cluster(config.two_cluster);
  Scenario sc;
  if (config.kind == "synthetic")
    sc.data = std::make_shared<EncodedDataset>(make_synthetic(config.synthetic));
  else if (config.kind == "csv")
    sc.data = std::make_shared<EncodedDataset>(load_csv_dataset(config.path, config.schema));
  else if (config.kind == "idx")
    sc.data = std::make_shared<EncodedDataset>(load_idx_images(config.images, config.labels, config.idx));
  else
    throw ConfigError("unknown dataset kind '" + config.kind + "'");
  if (sc.data->size() == 0) throw DataError("dataset has no rows");
  return sc;
}

}  // namespace blp
