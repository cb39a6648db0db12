#include "grouse/completion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "grouse/random.hpp"

namespace grouse {

namespace {

enum Substream : std::uint64_t {
  kShuffleStream = 11,
  kInitStream = 12,
  kFactorStream = 13,
  kSampleStream = 14,
};

double observed_rms(const DenseMatrix& basis, const std::vector<MaskedVector>& columns, std::size_t total) {
  if (total == 0) return 0.0;
  double sum = 0.0;
  const SubspaceEstimate state{basis, 0};
  for (const auto& col : columns) {
    if (!col.support.empty()) sum += evaluate_cost(state, col);
  }
  return std::sqrt(sum / static_cast<double>(total));
}

}  // namespace

std::vector<MaskedVector> split_columns(const CompletionProblem& problem) {
  std::vector<std::vector<std::pair<Index, double>>> cells(static_cast<std::size_t>(problem.n_cols));
  for (const Entry& e : problem.observed) {
    if (e.row < 0 || e.row >= problem.n_rows || e.col < 0 || e.col >= problem.n_cols) {
      throw std::invalid_argument("completion entry (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") out of range");
    }
    cells[static_cast<std::size_t>(e.col)].emplace_back(e.row, e.value);
  }
  std::vector<MaskedVector> columns;
  columns.reserve(cells.size());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    auto& col = cells[j];
    std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Index> rows(col.size());
    Vector values(static_cast<Index>(col.size()));
    for (std::size_t k = 0; k < col.size(); ++k) {
      if (k > 0 && col[k].first == col[k - 1].first) {
        throw std::invalid_argument("duplicate completion entry (" + std::to_string(col[k].first) + ", " +
                                    std::to_string(j) + ")");
      }
      rows[k] = col[k].first;
      values[static_cast<Index>(k)] = col[k].second;
    }
    columns.emplace_back(problem.n_rows, IndexSet(std::move(rows), problem.n_rows), std::move(values));
  }
  return columns;
}

CompletionResult solve_completion(const CompletionProblem& problem, const TrackerConfig& config,
                                  const CompletionObserver& observer) {
  if (problem.rank < 1 || problem.rank >= std::min(problem.n_rows, problem.n_cols)) {
    throw std::invalid_argument("completion rank must satisfy 1 <= rank < min(n_rows, n_cols)");
  }
  if (problem.passes < 1) throw std::invalid_argument("completion needs at least one pass");
  config.validate();

  const std::vector<MaskedVector> columns = split_columns(problem);

  CompletionResult result;
  result.basis = new_tracker(problem.n_rows, problem.rank, derive_seed(problem.shuffle_seed, kInitStream, 0));

  std::vector<std::size_t> order(columns.size());
  for (int pass = 1; pass <= problem.passes; ++pass) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(problem.shuffle_seed, kShuffleStream, static_cast<std::uint64_t>(pass)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    for (std::size_t j : order) {
      if (!observer.on_step) {
        grouse_step(result.basis, columns[j], config);
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      const UpdateReport report = grouse_step(result.basis, columns[j], config);
      const auto elapsed = std::chrono::steady_clock::now() - start;
      observer.on_step(report, result.basis,
                       std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
    }
    result.passes_run = pass;
    result.fit_history.push_back(observed_rms(result.basis.basis, columns, problem.observed.size()));
    if (observer.on_pass) observer.on_pass(pass, result.basis);

    if (problem.early_stop_rel > 0.0 && result.fit_history.size() >= 2) {
      const double prev = result.fit_history[result.fit_history.size() - 2];
      const double curr = result.fit_history.back();
      if (std::abs(prev - curr) <= problem.early_stop_rel * prev) break;
    }
  }

  const DenseMatrix& u = result.basis.basis;
  result.coefficients = DenseMatrix::Zero(problem.rank, problem.n_cols);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].support.empty()) {
      result.empty_columns.push_back(static_cast<Index>(j));
      continue;
    }
    result.coefficients.col(static_cast<Index>(j)) = masked_least_squares(u, columns[j]).weights;
  }
  result.reconstruction = u * result.coefficients;
  return result;
}

double relative_error(const DenseMatrix& approx, const DenseMatrix& truth) {
  if (approx.rows() != truth.rows() || approx.cols() != truth.cols()) {
    throw std::invalid_argument("relative_error: shape mismatch");
  }
  const double denom = truth.norm();
  if (denom == 0.0) throw std::invalid_argument("relative_error: reference matrix is zero");
  return (approx - truth).norm() / denom;
}

double svd_baseline_error(const DenseMatrix& data, Index rank) {
  if (rank < 0 || rank > std::min(data.rows(), data.cols())) {
    throw std::invalid_argument("svd_baseline_error: rank exceeds matrix dimensions");
  }
  const Vector s = Eigen::BDCSVD<DenseMatrix>(data).singularValues();
  const double total = s.squaredNorm();
  if (total == 0.0) throw std::invalid_argument("svd_baseline_error: data matrix is zero");
  return std::sqrt(s.tail(s.size() - rank).squaredNorm() / total);
}

DenseMatrix random_low_rank(Index n_rows, Index n_cols, Index rank, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kFactorStream, 0));
  const DenseMatrix left = rng.normal_matrix(n_rows, rank);
  const DenseMatrix right = rng.normal_matrix(rank, n_cols);
  return left * right;
}

CompletionProblem sample_problem(const DenseMatrix& truth, Index rank, double density, double noise_std,
                                 std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in (0, 1]");
  CompletionProblem problem;
  problem.n_rows = truth.rows();
  problem.n_cols = truth.cols();
  problem.rank = rank;
  problem.shuffle_seed = seed;
  Rng rng(derive_seed(seed, kSampleStream, 0));
  for (Index j = 0; j < truth.cols(); ++j) {
    for (Index i = 0; i < truth.rows(); ++i) {
      if (rng.uniform() < density) {
        const double noise = noise_std > 0.0 ? noise_std * rng.normal() : 0.0;
        problem.observed.push_back({i, j, truth(i, j) + noise});
      }
    }
  }
  return problem;
}

}  // namespace grouse
