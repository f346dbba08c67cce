#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "avfd/types.hpp"

namespace avfd {

/// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

/// SplitMix64 step for deriving independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Matrix gaussian_matrix(std::uint64_t seed, Eigen::Index rows,
                       Eigen::Index cols, double stddev);
Vector gaussian_vector(std::uint64_t seed, Eigen::Index size, double stddev);

}  // namespace avfd
