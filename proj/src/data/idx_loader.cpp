#include "blp/data/idx_loader.hpp"

#include <cstdint>
#include <fstream>
#include <istream>
#include <vector>

#include "blp/errors.hpp"

namespace blp {

namespace {

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw DataError(std::string("idx: truncated header in ") + what);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

EncodedDataset parse_idx(std::istream& images, std::istream& labels, const IdxOptions& opts) {
  constexpr std::uint32_t kImageMagic = 2051, kLabelMagic = 2049;
  if (auto m = read_be32(images, "images"); m != kImageMagic)
    throw DataError("idx: image magic " + std::to_string(m) + ", expected 2051");
  if (auto m = read_be32(labels, "labels"); m != kLabelMagic)
    throw DataError("idx: label magic " + std::to_string(m) + ", expected 2049");
  const std::uint32_t n_img = read_be32(images, "images");
  const std::uint32_t rows = read_be32(images, "images");
  const std::uint32_t cols = read_be32(images, "images");
  const std::uint32_t n_lab = read_be32(labels, "labels");
  if (n_img != n_lab)
    throw DataError("idx: " + std::to_string(n_img) + " images but " + std::to_string(n_lab) +
                    " labels");
  if (opts.downsample && (rows % 2 || cols % 2))
    throw DataError("idx: downsampling needs even image dimensions");

  const std::size_t n = opts.limit ? std::min<std::size_t>(*opts.limit, n_img) : n_img;
  const std::size_t pixels = std::size_t{rows} * cols;
  const std::size_t out_r = opts.downsample ? rows / 2 : rows;
  const std::size_t out_c = opts.downsample ? cols / 2 : cols;

  EncodedDataset ds;
  ds.name = "idx";
  ds.x = Matrix(n, out_r * out_c);
  ds.y.resize(n);
  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < n; ++i) {
    if (!images.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
      throw DataError("idx: image payload truncated at image " + std::to_string(i));
    auto row = ds.x.row(i);
    if (!opts.downsample) {
      for (std::size_t p = 0; p < pixels; ++p) row[p] = buf[p] / 255.0;
    } else {
      for (std::size_t r = 0; r < out_r; ++r)
        for (std::size_t c = 0; c < out_c; ++c) {
          const std::size_t a = (2 * r) * cols + 2 * c, b = a + cols;
          row[r * out_c + c] = (buf[a] + buf[a + 1] + buf[b] + buf[b + 1]) / (4.0 * 255.0);
        }
    }
    const int label = labels.get();
    if (label == std::char_traits<char>::eof())
      throw DataError("idx: label payload truncated at label " + std::to_string(i));
    ds.y[i] = label == opts.positive_digit ? 1.0 : 0.0;
  }
  ds.encoding.push_back({"pixels", 0, ds.x.cols(), false, {}, 0.0, 1.0});
  return ds;
}

EncodedDataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                               const IdxOptions& opts) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw DataError("cannot open " + images_path);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw DataError("cannot open " + labels_path);
  auto ds = parse_idx(images, labels, opts);
  ds.name = images_path;
  return ds;
}

}  // namespace blp
