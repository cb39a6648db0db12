#include "grouse/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace grouse {

IndexSet::IndexSet(std::vector<Index> indices, Index ambient_dim) : indices_(std::move(indices)) {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= ambient_dim) {
      throw std::invalid_argument("IndexSet: index " + std::to_string(indices_[i]) +
                                  " outside [0, " + std::to_string(ambient_dim) + ")");
    }
    if (i > 0 && indices_[i] <= indices_[i - 1]) {
      throw std::invalid_argument("IndexSet: indices must be strictly increasing");
    }
  }
}

IndexSet IndexSet::full(Index ambient_dim) {
  std::vector<Index> all(static_cast<std::size_t>(ambient_dim));
  for (Index i = 0; i < ambient_dim; ++i) all[static_cast<std::size_t>(i)] = i;
  return IndexSet(std::move(all), ambient_dim);
}

MaskedVector::MaskedVector(Index ambient_dim_, IndexSet support_, Vector values_)
    : ambient_dim(ambient_dim_), support(std::move(support_)), values(std::move(values_)) {
  if (static_cast<std::size_t>(values.size()) != support.size()) {
    throw std::invalid_argument("MaskedVector: values length differs from support size");
  }
  if (!support.empty() && support.indices().back() >= ambient_dim) {
    throw std::invalid_argument("MaskedVector: support exceeds ambient dimension");
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("MaskedVector: non-finite observation");
  }
}

MaskedVector MaskedVector::observe(const Vector& full, IndexSet support) {
  Vector values(static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) values[static_cast<Index>(k)] = full[support[k]];
  return MaskedVector(full.size(), std::move(support), std::move(values));
}

DenseMatrix gather_rows(const DenseMatrix& a, const IndexSet& rows) {
  DenseMatrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = a.row(rows[k]);
  return out;
}

namespace {

// Minimum-norm solve of min ||M x - b|| given an SVD of M.
template <typename Svd>
LeastSquaresResult solve_from_svd(const Svd& svd, const Vector& b, Index unknowns) {
  const Vector& s = svd.singularValues();
  LeastSquaresResult out;
  out.used_svd = true;
  const double largest = s.size() > 0 ? s[0] : 0.0;
  // Fewer equations than unknowns leaves trailing singular values at zero.
  const double smallest = s.size() == unknowns ? s[s.size() - 1] : 0.0;
  const double floor = kRankTolerance * largest;
  out.rank_ok = largest > 0.0 && smallest > floor;

  Vector coeffs = svd.matrixU().transpose() * b;
  for (Index i = 0; i < s.size(); ++i) {
    coeffs[i] = s[i] > floor && s[i] > 0.0 ? coeffs[i] / s[i] : 0.0;
  }
  out.weights = svd.matrixV() * coeffs;
  return out;
}

// Condition numbers below this certify rank_ok without an SVD: kappa_2 is at
// most d * kappa_1, far from 1 / kRankTolerance for any practical d.
constexpr double kFastPathCondition = 1e6;

}  // namespace

LeastSquaresResult masked_least_squares(const DenseMatrix& basis, const MaskedVector& obs) {
  if (obs.ambient_dim != basis.rows()) {
    throw std::invalid_argument("masked_least_squares: observation dimension " +
                                std::to_string(obs.ambient_dim) + " != basis rows " +
                                std::to_string(basis.rows()));
  }
  if (obs.support.empty()) {
    throw std::invalid_argument("masked_least_squares: empty support");
  }
  const Index d = basis.cols();
  const DenseMatrix sub = gather_rows(basis, obs.support);
  const Index m = sub.rows();

  if (m < d) {
    Eigen::JacobiSVD<DenseMatrix> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return solve_from_svd(svd, obs.values, d);
  }

  // U_Omega = Q R; the d x d factor R carries the singular values of U_Omega.
  Eigen::HouseholderQR<DenseMatrix> qr(sub);
  const DenseMatrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const Vector qtb = (qr.householderQ().transpose() * obs.values).head(d);

  const auto upper = r.triangularView<Eigen::Upper>();
  if (r.diagonal().cwiseAbs().minCoeff() > 0.0) {
    const DenseMatrix r_inv = upper.solve(DenseMatrix::Identity(d, d));
    const double kappa1 = r.cwiseAbs().colwise().sum().maxCoeff() * r_inv.cwiseAbs().colwise().sum().maxCoeff();
    if (std::isfinite(kappa1) && kappa1 < kFastPathCondition) {
      return LeastSquaresResult{upper.solve(qtb), true, false};
    }
  }
  Eigen::JacobiSVD<DenseMatrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return solve_from_svd(svd, qtb, d);
}

DenseMatrix orthonormalize(const DenseMatrix& a) {
  const Index n = a.rows();
  const Index d = a.cols();
  if (d == 0 || d > n) {
    throw std::invalid_argument("orthonormalize: need 1 <= cols <= rows");
  }
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  const DenseMatrix r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const Vector s = Eigen::JacobiSVD<DenseMatrix>(r).singularValues();
  if (!(s[d - 1] > kRankTolerance * s[0])) {
    throw std::invalid_argument("orthonormalize: input is rank deficient");
  }
  DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, d);
  // Fix signs so that diag(R) > 0; makes the factorization unique.
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

DenseMatrix expm_skew(const DenseMatrix& skew, double s) {
  if (skew.rows() != skew.cols()) {
    throw std::invalid_argument("expm_skew: matrix is not square");
  }
  const double norm = skew.norm();
  if ((skew + skew.transpose()).norm() > 1e-12 * norm) {
    throw std::invalid_argument("expm_skew: matrix is not skew-symmetric");
  }
  if (norm == 0.0 || s == 0.0) {
    return DenseMatrix::Identity(skew.rows(), skew.cols());
  }
  const DenseMatrix scaled = s * skew;
  return scaled.exp();
}

double orthonormality_defect(const DenseMatrix& x) {
  return (x.transpose() * x - DenseMatrix::Identity(x.cols(), x.cols())).norm();
}

double subspace_error(const DenseMatrix& u, const DenseMatrix& w) {
  if (u.rows() != w.rows() || u.cols() != w.cols() || u.cols() == 0) {
    throw std::invalid_argument("subspace_error: shape mismatch");
  }
  if (orthonormality_defect(u) > 1e-8 || orthonormality_defect(w) > 1e-8) {
    throw std::invalid_argument("subspace_error: inputs must be orthonormal");
  }
  const DenseMatrix residual = w - u * (u.transpose() * w);
  const double err = residual.norm() / std::sqrt(static_cast<double>(u.cols()));
  return std::min(err, 1.0);
}

}  // namespace grouse
