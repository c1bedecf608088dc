#include "blp/nn/weights_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "blp/errors.hpp"

namespace blp {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw DataError("weights file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_weights(std::ostream& out, const MlpParams& params) {
  write_le<std::uint64_t>(out, params.layer_sizes.size());
  for (auto s : params.layer_sizes) write_le<std::uint64_t>(out, s);
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    for (double v : params.weights[i].flat()) write_le(out, v);
    for (double v : params.biases[i]) write_le(out, v);
  }
}

MlpParams load_weights(std::istream& in, Activation output_activation,
                       Activation hidden_activation) {
  const auto n = read_le<std::uint64_t>(in);
  if (n < 2 || n > 1024) throw DataError("weights file: implausible layer count");
  std::vector<std::size_t> sizes(n);
  for (auto& s : sizes) s = static_cast<std::size_t>(read_le<std::uint64_t>(in));
  MlpParams p = make_zero_mlp(sizes, output_activation);
  p.hidden_activation = hidden_activation;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    for (double& v : p.weights[i].flat()) v = read_le<double>(in);
    for (double& v : p.biases[i]) v = read_le<double>(in);
  }
  return p;
}

void save_weights(const std::string& path, const MlpParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  save_weights(out, params);
}

MlpParams load_weights(const std::string& path, Activation output_activation,
                       Activation hidden_activation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return load_weights(in, output_activation, hidden_activation);
}

}  // namespace blp
