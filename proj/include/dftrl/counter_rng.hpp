#pragma once

#include <cstdint>
#include <initializer_list>

namespace dftrl {

// Stateless counter-based generator: the output depends only on the key, so
// draws are reproducible regardless of the order in which they are consumed.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t counter_hash(std::initializer_list<std::uint64_t> key) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (std::uint64_t k : key) h = splitmix64(h ^ splitmix64(k));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits of the hashed key.
constexpr double counter_uniform(std::initializer_list<std::uint64_t> key) {
  return static_cast<double>(counter_hash(key) >> 11) * 0x1.0p-53;
}

}  // namespace dftrl
