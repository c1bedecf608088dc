#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace blp {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives an independent stream seed from a master seed and a list of tags.
// Tags are hashed in order, so ("adopt", "uniform") and ("uniform", "adopt")
// give different seeds.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::string_view> tags) {
  std::uint64_t h = mix64(master);
  for (auto tag : tags) h = mix64(h ^ fnv1a(tag));
  return h;
}

}  // namespace blp
