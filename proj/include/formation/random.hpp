#pragma once

#include <cstdint>
#include <random>

#include "formation/graph.hpp"

namespace formation {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// splitmix64 finalizer; gives independent sub-stream seeds so parallel work
/// stays deterministic regardless of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Coordinates uniform on [-1, 1].
Configuration random_configuration(int n, int d, Rng &rng);

/// p + scale * g with g standard normal per coordinate.
Configuration perturb(const Configuration &p, double scale, Rng &rng);

} // namespace formation
