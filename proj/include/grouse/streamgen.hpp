#pragma once

// Synthetic streams v_t = U[t] alpha + beta with alpha ~ N(0, I_d) and
// beta ~ N(0, noise^2 I_n), plus random observation masks.
//
// Every random draw at time t comes from a generator seeded by
// (seed, purpose, t), so outputs depend only on the model and t.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "grouse/linalg.hpp"

namespace grouse {

enum class ModelKind { Static, Switching, Rotating };
enum class SamplingKind { FixedSize, Bernoulli };

std::string_view to_string(ModelKind kind);
std::string_view to_string(SamplingKind kind);

struct GenerativeModel {
  ModelKind kind = ModelKind::Static;
  Index n = 700;
  Index d = 10;
  double noise_std = 0.0;
  /// Times at which a fresh subspace takes over (Switching only).
  std::vector<std::int64_t> switch_times;
  /// Rotation rate of exp(delta * t * B) (Rotating only).
  double delta = 1e-5;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const GenerativeModel&) const = default;
};

struct SamplingModel {
  SamplingKind kind = SamplingKind::FixedSize;
  double density = 1.0;
  std::uint64_t seed = 2;

  void validate() const;
  bool operator==(const SamplingModel&) const = default;
};

/// Uniformly distributed d-dimensional subspace of R^n (orthonormal basis).
DenseMatrix planted_subspace(Index n, Index d, std::uint64_t seed);

/// Skew-symmetric generator: Gaussian strict upper triangle, antisymmetrized,
/// scaled to unit spectral norm (power-iteration estimate).
DenseMatrix random_skew_generator(Index n, std::uint64_t seed);

/// Observation set for time t. FixedSize draws exactly round(density * n)
/// indices without replacement; Bernoulli keeps each index with probability
/// density. Throws std::invalid_argument for an empty FixedSize mask.
IndexSet draw_mask(const SamplingModel& sampling, Index n, std::int64_t t);

/// Stateful generator for one GenerativeModel. Rotating bases are advanced by
/// a precomputed one-step rotation, so true_basis(t) is always G^t U0 evaluated
/// by repeated multiplication; sequential access is cheapest.
class SubspaceStream {
 public:
  explicit SubspaceStream(GenerativeModel model);

  const GenerativeModel& model() const { return model_; }

  /// Orthonormal basis of the subspace generating v_t.
  const DenseMatrix& true_basis(std::int64_t t);

  /// Full (unmasked) v_t, t >= 1.
  Vector next_vector(std::int64_t t);

  /// Index of the subspace segment active at time t (Switching).
  std::size_t segment_at(std::int64_t t) const;

  /// Unit-norm skew generator B (Rotating; empty otherwise).
  const DenseMatrix& generator() const { return generator_; }

 private:
  GenerativeModel model_;
  std::vector<DenseMatrix> segments_;
  // Rotating state.
  DenseMatrix initial_;
  DenseMatrix generator_;
  DenseMatrix one_step_;
  DenseMatrix current_;
  std::int64_t current_t_ = 0;
};

}  // namespace grouse
