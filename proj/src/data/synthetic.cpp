#include "blp/data/synthetic.hpp"

#include <cmath>
#include <numeric>

#include "blp/errors.hpp"
#include "blp/rng.hpp"

namespace blp {

EncodedDataset make_synthetic(const SyntheticSpec& spec) {
  if (spec.dim == 0) throw PreconditionError("make_synthetic: dim must be >= 1");
  std::vector<double> theta = spec.theta;
  if (theta.empty()) theta.assign(spec.dim, 0.0);
  if (theta.size() != spec.dim) throw ShapeError("make_synthetic: theta length != dim");

  std::vector<MixtureComponent> comps = spec.components;
  if (comps.empty()) comps.push_back({std::vector<double>(spec.dim, 0.0), 1.0, 1.0});
  for (const auto& c : comps)
    if (c.mean.size() != spec.dim) throw ShapeError("make_synthetic: component mean length != dim");
  std::vector<double> cdf;
  double total = 0.0;
  for (const auto& c : comps) cdf.push_back(total += c.weight);
  if (!(total > 0.0)) throw PreconditionError("make_synthetic: component weights sum to zero");
  if (spec.group && spec.group->feature >= spec.dim)
    throw ShapeError("make_synthetic: group feature out of range");

  Rng rng(spec.seed);
  EncodedDataset ds;
  ds.name = "synthetic";
  ds.x = Matrix(spec.n, spec.dim);
  ds.y.resize(spec.n);
  ds.oracle_prob.resize(spec.n);
  GroupColumn component{"component", {}, std::vector<std::size_t>(spec.n)};
  for (std::size_t k = 0; k < comps.size(); ++k) component.levels.push_back("c" + std::to_string(k));
  GroupColumn group;
  if (spec.group) {
    group.attribute = spec.group->attribute;
    group.levels = {spec.group->below, spec.group->above};
    group.codes.resize(spec.n);
  }

  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = uniform01(rng) * total;
    std::size_t k = 0;
    while (k + 1 < comps.size() && u >= cdf[k]) ++k;
    component.codes[i] = k;
    auto row = ds.x.row(i);
    for (std::size_t j = 0; j < spec.dim; ++j)
      row[j] = comps[k].mean[j] + comps[k].std * standard_normal(rng);
    const double z = std::inner_product(theta.begin(), theta.end(), row.begin(), spec.bias);
    ds.oracle_prob[i] = 1.0 / (1.0 + std::exp(-z));
    ds.y[i] = uniform01(rng) < ds.oracle_prob[i] ? 1.0 : 0.0;
    if (spec.group) {
      const double score = row[spec.group->feature] + spec.group->noise * standard_normal(rng);
      group.codes[i] = score > spec.group->threshold ? 1 : 0;
    }
  }
  for (std::size_t j = 0; j < spec.dim; ++j)
    ds.encoding.push_back({"x" + std::to_string(j), j, 1, false, {}, 0.0, 1.0});
  ds.groups.push_back(std::move(component));
  if (spec.group) ds.groups.push_back(std::move(group));
  return ds;
}

}  // namespace blp
