#include "grouse/streamgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "grouse/random.hpp"

namespace grouse {

namespace {

enum Substream : std::uint64_t {
  kBasisStream = 1,
  kSampleStream = 2,
  kMaskStream = 3,
  kSkewStream = 4,
};

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Static: return "static";
    case ModelKind::Switching: return "switching";
    case ModelKind::Rotating: return "rotating";
  }
  return "unknown";
}

std::string_view to_string(SamplingKind kind) {
  return kind == SamplingKind::FixedSize ? "fixed" : "bernoulli";
}

void GenerativeModel::validate() const {
  if (d < 1 || d >= n) throw std::invalid_argument("generative model needs 1 <= d < n");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  for (std::size_t i = 1; i < switch_times.size(); ++i) {
    if (switch_times[i] <= switch_times[i - 1]) {
      throw std::invalid_argument("switch_times must be strictly increasing");
    }
  }
  if (kind == ModelKind::Rotating && !(delta > 0.0)) {
    throw std::invalid_argument("rotating model needs delta > 0");
  }
}

void SamplingModel::validate() const {
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("sampling density must lie in (0, 1], got " + std::to_string(density));
  }
}

DenseMatrix planted_subspace(Index n, Index d, std::uint64_t seed) {
  if (d < 1 || d >= n) throw std::invalid_argument("planted_subspace: need 1 <= d < n");
  Rng rng(seed);
  return orthonormalize(rng.normal_matrix(n, d));
}

DenseMatrix random_skew_generator(Index n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix b = DenseMatrix::Zero(n, n);
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      b(i, j) = rng.normal();
      b(j, i) = -b(i, j);
    }
  }
  // Power iteration on B^T B for the largest singular value.
  Vector x = rng.normal_vector(n).normalized();
  double estimate = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const Vector y = b.transpose() * (b * x);
    const double norm = y.norm();
    if (norm == 0.0) break;
    x = y / norm;
    const double next = std::sqrt(norm);
    if (std::abs(next - estimate) <= 1e-12 * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  if (estimate > 0.0) b /= estimate;
  return b;
}

IndexSet draw_mask(const SamplingModel& sampling, Index n, std::int64_t t) {
  sampling.validate();
  Rng rng(derive_seed(sampling.seed, kMaskStream, static_cast<std::uint64_t>(t)));
  std::vector<Index> picked;
  if (sampling.kind == SamplingKind::FixedSize) {
    const auto count = static_cast<Index>(std::llround(sampling.density * static_cast<double>(n)));
    if (count == 0) {
      throw std::invalid_argument("draw_mask: density " + std::to_string(sampling.density) +
                                  " selects no entries of n=" + std::to_string(n));
    }
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    // Partial Fisher-Yates.
    for (Index i = 0; i < count; ++i) {
      const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    picked.assign(pool.begin(), pool.begin() + count);
    std::sort(picked.begin(), picked.end());
  } else {
    for (Index i = 0; i < n; ++i) {
      if (rng.uniform() < sampling.density) picked.push_back(i);
    }
  }
  return IndexSet(std::move(picked), n);
}

SubspaceStream::SubspaceStream(GenerativeModel model) : model_(std::move(model)) {
  model_.validate();
  const std::size_t segments = model_.kind == ModelKind::Switching ? model_.switch_times.size() + 1 : 1;
  for (std::size_t k = 0; k < segments; ++k) {
    segments_.push_back(planted_subspace(model_.n, model_.d, derive_seed(model_.seed, kBasisStream, k)));
  }
  if (model_.kind == ModelKind::Rotating) {
    initial_ = segments_.front();
    generator_ = random_skew_generator(model_.n, derive_seed(model_.seed, kSkewStream, 0));
    one_step_ = expm_skew(generator_, model_.delta);
    current_ = initial_;
    current_t_ = 0;
  }
}

std::size_t SubspaceStream::segment_at(std::int64_t t) const {
  if (model_.kind != ModelKind::Switching) return 0;
  const auto& times = model_.switch_times;
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

const DenseMatrix& SubspaceStream::true_basis(std::int64_t t) {
  if (model_.kind != ModelKind::Rotating) return segments_[segment_at(t)];
  if (t < current_t_) {
    current_ = initial_;
    current_t_ = 0;
  }
  while (current_t_ < t) {
    current_ = one_step_ * current_;
    ++current_t_;
  }
  return current_;
}

Vector SubspaceStream::next_vector(std::int64_t t) {
  if (t < 1) throw std::invalid_argument("next_vector: t must be >= 1");
  const DenseMatrix& basis = true_basis(t);
  Rng rng(derive_seed(model_.seed, kSampleStream, static_cast<std::uint64_t>(t)));
  const Vector alpha = rng.normal_vector(model_.d);
  Vector v = basis * alpha;
  if (model_.noise_std > 0.0) v += model_.noise_std * rng.normal_vector(model_.n);
  return v;
}

}  // namespace grouse
