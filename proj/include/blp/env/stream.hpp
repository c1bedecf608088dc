#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blp/data/dataset.hpp"
#include "blp/env/batch.hpp"
#include "blp/rng.hpp"

namespace blp {

enum class Sampler {
  uniform,     // S1: shuffle without replacement
  stratified,  // S2: per-batch positive rate held at the dataset rate
  drift,       // S3: positive rate moves linearly from p0 to p1
  covariate,   // S4: sorted by one feature, jittered within a window
  bootstrap,   // S5: uniform with replacement
};

std::string_view to_string(Sampler s);
std::optional<Sampler> parse_sampler(std::string_view s);
inline constexpr Sampler kAllSamplers[] = {Sampler::uniform, Sampler::stratified, Sampler::drift,
                                           Sampler::covariate, Sampler::bootstrap};

struct StreamConfig {
  std::string dataset_id;
  std::size_t batch_size = 32;
  std::size_t horizon = 2500;
  Sampler sampler = Sampler::uniform;
  std::uint64_t seed = 0;

  double drift_p0 = 0.1;
  double drift_p1 = 0.9;
  std::size_t covariate_feature = 0;
  double covariate_jitter_batches = 5.0;
  // When false, S1/S2/S3/S4 end the stream once the pool runs out instead of
  // reshuffling.
  bool reshuffle = true;
  // Dataset rows served before the sampler starts, in this order.
  std::vector<std::size_t> lead_in;
  // Restrict sampling to these rows (all rows when empty).
  std::vector<std::size_t> pool;
};

class Stream {
 public:
  Stream(std::shared_ptr<const EncodedDataset> data, StreamConfig config);

  // nullopt once the horizon is reached or the pool is exhausted.
  std::optional<Batch> next_batch();
  // Advances past n batches without materializing them.
  void skip(std::size_t n);

  std::size_t steps_emitted() const noexcept { return step_; }
  const StreamConfig& config() const noexcept { return config_; }
  const EncodedDataset& dataset() const noexcept { return *data_; }

 private:
  std::optional<std::vector<std::size_t>> next_indices();
  bool draw_from(std::vector<std::size_t>& order, std::size_t& cursor, std::size_t count,
                 std::vector<std::size_t>& out);
  void refill_order();
  LabeledPoint make_point(std::size_t row) const;

  std::shared_ptr<const EncodedDataset> data_;
  StreamConfig config_;
  Rng rng_;
  std::size_t step_ = 0;
  std::size_t lead_in_cursor_ = 0;
  std::vector<std::size_t> pool_;
  std::vector<std::size_t> order_, pos_order_, neg_order_;
  std::size_t cursor_ = 0, pos_cursor_ = 0, neg_cursor_ = 0;
  double positive_rate_ = 0.0;
  bool exhausted_ = false;
};

}  // namespace blp
