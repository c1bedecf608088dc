#include "blp/env/stream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blp/errors.hpp"

namespace blp {

std::string_view to_string(Sampler s) {
  switch (s) {
    case Sampler::uniform: return "uniform";
    case Sampler::stratified: return "stratified";
    case Sampler::drift: return "drift";
    case Sampler::covariate: return "covariate";
    case Sampler::bootstrap: return "bootstrap";
  }
  return "?";
}

std::optional<Sampler> parse_sampler(std::string_view s) {
  for (Sampler v : kAllSamplers)
    if (to_string(v) == s) return v;
  if (s == "S1") return Sampler::uniform;
  if (s == "S2") return Sampler::stratified;
  if (s == "S3") return Sampler::drift;
  if (s == "S4") return Sampler::covariate;
  if (s == "S5") return Sampler::bootstrap;
  return std::nullopt;
}

Stream::Stream(std::shared_ptr<const EncodedDataset> data, StreamConfig config)
    : data_(std::move(data)),
      config_(std::move(config)),
      rng_(derive_seed(config_.seed, {"stream", to_string(config_.sampler)})) {
  if (!data_) throw PreconditionError("stream needs a dataset");
  if (config_.batch_size < 1) throw PreconditionError("batch size must be >= 1");
  if (config_.horizon < 1) throw PreconditionError("horizon must be >= 1");
  const std::size_t n = data_->size();
  if (config_.pool.empty()) {
    pool_.resize(n);
    std::iota(pool_.begin(), pool_.end(), std::size_t{0});
  } else {
    pool_ = config_.pool;
  }
  for (std::size_t i : pool_)
    if (i >= n) throw PreconditionError("pool index out of range");
  for (std::size_t i : config_.lead_in)
    if (i >= n) throw PreconditionError("lead-in index out of range");
  if (pool_.empty()) throw PreconditionError("empty sampling pool");

  for (std::size_t i : pool_) (data_->y[i] == 1.0 ? pos_order_ : neg_order_).push_back(i);
  positive_rate_ = static_cast<double>(pos_order_.size()) / static_cast<double>(pool_.size());
  if (config_.sampler == Sampler::drift && (pos_order_.empty() || neg_order_.empty()))
    throw DataError("drift sampler needs both classes in the pool");
  if (config_.sampler == Sampler::covariate && config_.covariate_feature >= data_->dim())
    throw PreconditionError("covariate feature out of range");
  refill_order();
}

void Stream::refill_order() {
  switch (config_.sampler) {
    case Sampler::uniform:
      order_ = pool_;
      std::shuffle(order_.begin(), order_.end(), rng_);
      break;
    case Sampler::covariate: {
      std::vector<std::size_t> by_value = pool_;
      const std::size_t f = config_.covariate_feature;
      std::stable_sort(by_value.begin(), by_value.end(), [&](std::size_t a, std::size_t b) {
        return data_->x(a, f) < data_->x(b, f);
      });
      // Rank plus uniform jitter: points move by at most the window.
      const double window = config_.covariate_jitter_batches * static_cast<double>(config_.batch_size);
      std::vector<std::pair<double, std::size_t>> keyed(by_value.size());
      for (std::size_t r = 0; r < by_value.size(); ++r)
        keyed[r] = {static_cast<double>(r) + window * uniform01(rng_), by_value[r]};
      std::stable_sort(keyed.begin(), keyed.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      order_.resize(keyed.size());
      for (std::size_t r = 0; r < keyed.size(); ++r) order_[r] = keyed[r].second;
      break;
    }
    case Sampler::stratified:
    case Sampler::drift:
      std::shuffle(pos_order_.begin(), pos_order_.end(), rng_);
      std::shuffle(neg_order_.begin(), neg_order_.end(), rng_);
      break;
    case Sampler::bootstrap:
      break;
  }
  cursor_ = pos_cursor_ = neg_cursor_ = 0;
}

bool Stream::draw_from(std::vector<std::size_t>& order, std::size_t& cursor, std::size_t count,
                       std::vector<std::size_t>& out) {
  for (std::size_t k = 0; k < count; ++k) {
    if (cursor == order.size()) {
      if (!config_.reshuffle || order.empty()) return false;
      if (&order == &order_) {
        refill_order();
      } else {
        std::shuffle(order.begin(), order.end(), rng_);
        cursor = 0;
      }
    }
    out.push_back(order[cursor++]);
  }
  return true;
}

std::optional<std::vector<std::size_t>> Stream::next_indices() {
  if (step_ >= config_.horizon || exhausted_) return std::nullopt;
  const std::size_t b = config_.batch_size;
  const std::size_t t = step_ + 1;
  std::vector<std::size_t> idx;
  idx.reserve(b);
  while (idx.size() < b && lead_in_cursor_ < config_.lead_in.size())
    idx.push_back(config_.lead_in[lead_in_cursor_++]);
  const std::size_t want = b - idx.size();

  bool ok = true;
  switch (config_.sampler) {
    case Sampler::uniform:
    case Sampler::covariate:
      ok = draw_from(order_, cursor_, want, idx);
      break;
    case Sampler::stratified: {
      // Bresenham split keeps the running positive count at t*B*rate.
      const double per = static_cast<double>(b) * positive_rate_;
      auto target = [&](std::size_t s) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(s) * per + 1e-9));
      };
      std::size_t k = std::min(want, target(t) - target(t - 1));
      std::vector<std::size_t> drawn;
      ok = draw_from(pos_order_, pos_cursor_, k, drawn) &&
           draw_from(neg_order_, neg_cursor_, want - k, drawn);
      std::shuffle(drawn.begin(), drawn.end(), rng_);
      idx.insert(idx.end(), drawn.begin(), drawn.end());
      break;
    }
    case Sampler::drift: {
      const double frac = config_.horizon > 1 ? static_cast<double>(t - 1) /
                                                    static_cast<double>(config_.horizon - 1)
                                              : 0.0;
      const double p = config_.drift_p0 + (config_.drift_p1 - config_.drift_p0) * frac;
      for (std::size_t k = 0; k < want && ok; ++k) {
        if (uniform01(rng_) < p)
          ok = draw_from(pos_order_, pos_cursor_, 1, idx);
        else
          ok = draw_from(neg_order_, neg_cursor_, 1, idx);
      }
      break;
    }
    case Sampler::bootstrap:
      for (std::size_t k = 0; k < want; ++k) idx.push_back(pool_[uniform_index(rng_, pool_.size())]);
      break;
  }
  if (!ok) {
    exhausted_ = true;
    if (idx.empty()) return std::nullopt;
  }
  ++step_;
  return idx;
}

LabeledPoint Stream::make_point(std::size_t row) const {
  std::map<std::string, std::string> tags;
  for (const auto& g : data_->groups) tags.emplace(g.attribute, g.level_of(row));
  auto f = data_->x.row(row);
  std::optional<double> rho;
  if (data_->has_oracle()) rho = data_->oracle_prob[row];
  return LabeledPoint(std::vector<double>(f.begin(), f.end()), data_->y[row], rho, std::move(tags),
                      row);
}

std::optional<Batch> Stream::next_batch() {
  auto idx = next_indices();
  if (!idx) return std::nullopt;
  Batch batch;
  batch.step = step_;
  batch.points.reserve(idx->size());
  for (std::size_t row : *idx) batch.points.push_back(make_point(row));
  return batch;
}

void Stream::skip(std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!next_indices()) break;
}

}  // namespace blp
