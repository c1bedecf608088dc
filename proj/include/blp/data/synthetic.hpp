#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blp/data/dataset.hpp"

namespace blp {

struct MixtureComponent {
  std::vector<double> mean;
  double std = 1.0;
  double weight = 1.0;
};

// Group attribute driven by one feature: level `above` when
// x[feature] + noise * N(0,1) > threshold, `below` otherwise.
struct GroupSpec {
  std::string attribute = "group";
  std::size_t feature = 0;
  double threshold = 0.0;
  double noise = 0.0;
  std::string below = "A";
  std::string above = "B";
};

struct SyntheticSpec {
  std::size_t n = 10000;
  std::size_t dim = 2;
  std::vector<double> theta;  // empty means all zeros
  double bias = 0.0;
  std::vector<MixtureComponent> components;  // empty means one N(0, I)
  std::optional<GroupSpec> group;
  std::uint64_t seed = 0;
};

// x from the seeded Gaussian mixture, rho*(x) = sigmoid(theta . x + bias),
// y ~ Bernoulli(rho*). The mixture component of each row is recorded as the
// group attribute "component" (levels c0, c1, ...).
EncodedDataset make_synthetic(const SyntheticSpec& spec);

}  // namespace blp
