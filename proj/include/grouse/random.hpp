#pragma once

// Seedable randomness with a platform-independent output stream.
//
// Engine: std::mt19937_64 (its output sequence is fixed by the standard).
// Uniforms take the top 53 bits; normals use the Box-Muller transform. The
// std distributions are avoided because their algorithms are
// implementation-defined.

#include <cstdint>
#include <random>

#include "grouse/linalg.hpp"

namespace grouse {

/// SplitMix64 finalizer, used to derive independent substream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for substream `stream` at position `index` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix_seed(mix_seed(seed ^ mix_seed(stream)) + index);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();

  Vector normal_vector(Index n);
  DenseMatrix normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace grouse
