#pragma once

// Dense kernels used by the tracker. All matrices are Eigen's default
// column-major storage; every kernel here assumes that layout.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace grouse {

using DenseMatrix = Eigen::MatrixXd;  // column-major
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free coordinate set inside [0, ambient_dim).
class IndexSet {
 public:
  IndexSet() = default;
  /// Throws std::invalid_argument unless `indices` is strictly increasing and
  /// every entry is below `ambient_dim`.
  IndexSet(std::vector<Index> indices, Index ambient_dim);

  static IndexSet full(Index ambient_dim);

  std::span<const Index> indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  Index operator[](std::size_t i) const { return indices_[i]; }

  bool operator==(const IndexSet&) const = default;

 private:
  std::vector<Index> indices_;
};

/// Partially observed vector: values at `support` of an `ambient_dim` vector.
struct MaskedVector {
  Index ambient_dim = 0;
  IndexSet support;
  Vector values;

  /// Validates sizes and finiteness; throws std::invalid_argument.
  MaskedVector(Index ambient_dim, IndexSet support, Vector values);

  /// Observes `full` on `support`.
  static MaskedVector observe(const Vector& full, IndexSet support);
};

/// Rows of `a` selected by `rows`.
DenseMatrix gather_rows(const DenseMatrix& a, const IndexSet& rows);

struct LeastSquaresResult {
  Vector weights;
  bool rank_ok = true;
  /// True when the rank decision needed a full SVD of the triangular factor.
  bool used_svd = false;
};

/// Relative singular-value floor below which U_Omega counts as rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// argmin_a ||U_Omega a - v_Omega||, through a Householder QR of U_Omega.
/// The triangular factor R is back-substituted when its 1-norm condition
/// number is small enough to certify full rank (kappa_2 <= d * kappa_1);
/// otherwise an SVD of R decides, and a rank-deficient system yields the
/// minimum-norm solution with `rank_ok == false`.
LeastSquaresResult masked_least_squares(const DenseMatrix& basis, const MaskedVector& obs);

/// Orthonormal basis of span(a). Throws std::invalid_argument if `a` is rank
/// deficient.
DenseMatrix orthonormalize(const DenseMatrix& a);

/// exp(s * B) for skew-symmetric B. Throws std::invalid_argument otherwise.
DenseMatrix expm_skew(const DenseMatrix& skew, double s);

/// ||(I - U U^T) W||_F / sqrt(d), in [0, 1]. Both arguments must be
/// orthonormal (||X^T X - I||_F <= 1e-8) with equal shapes.
double subspace_error(const DenseMatrix& u, const DenseMatrix& w);

/// ||X^T X - I||_F.
double orthonormality_defect(const DenseMatrix& x);

}  // namespace grouse
