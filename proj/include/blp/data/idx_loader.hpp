#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "blp/data/dataset.hpp"

namespace blp {

struct IdxOptions {
  int positive_digit = 5;
  bool downsample = false;          // 2x2 average pooling, 28x28 -> 14x14
  std::optional<std::size_t> limit; // keep only the first `limit` images
};

// IDX as distributed with MNIST: big-endian u32 magic (2051 images, 2049
// labels), big-endian u32 dimension sizes, then raw unsigned bytes.
EncodedDataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                               const IdxOptions& opts = {});
EncodedDataset parse_idx(std::istream& images, std::istream& labels, const IdxOptions& opts = {});

}  // namespace blp
