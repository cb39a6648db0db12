#pragma once

// Online matrix completion: columns of a partially observed matrix are fed to
// the tracker in shuffled passes, then each column is fit against the final
// basis. The reconstruction is U * A with A the per-column least-squares
// coefficients.

#include <cstdint>
#include <functional>
#include <vector>

#include "grouse/linalg.hpp"
#include "grouse/tracker.hpp"

namespace grouse {

struct Entry {
  Index row = 0;
  Index col = 0;
  double value = 0.0;

  bool operator==(const Entry&) const = default;
};

struct CompletionProblem {
  Index n_rows = 0;
  Index n_cols = 0;
  Index rank = 1;
  std::vector<Entry> observed;
  int passes = 1;
  std::uint64_t shuffle_seed = 0;
  /// Stop once the observed-entry RMS changes by less than this relative
  /// amount between passes; 0 disables early stopping.
  double early_stop_rel = 0.0;
};

struct CompletionResult {
  SubspaceEstimate basis;
  DenseMatrix coefficients;    // rank x n_cols
  DenseMatrix reconstruction;  // n_rows x n_cols
  /// Observed-entry RMS after each pass.
  std::vector<double> fit_history;
  std::vector<Index> empty_columns;
  int passes_run = 0;
};

/// Optional hooks into the descent. on_step sees every column presentation
/// with the time spent inside grouse_step; on_pass runs after each pass
/// (1-based).
struct CompletionObserver {
  std::function<void(const UpdateReport& report, const SubspaceEstimate& state, std::int64_t wall_nanos)> on_step;
  std::function<void(int pass, const SubspaceEstimate& state)> on_pass;
};

/// Columns of the problem as masked vectors; empty columns get an empty support.
std::vector<MaskedVector> split_columns(const CompletionProblem& problem);

/// Throws std::invalid_argument for rank >= min(n_rows, n_cols), passes < 1,
/// out-of-range or duplicate entries.
CompletionResult solve_completion(const CompletionProblem& problem, const TrackerConfig& config,
                                  const CompletionObserver& observer = {});

/// ||approx - truth||_F / ||truth||_F. Throws if truth is zero or shapes differ.
double relative_error(const DenseMatrix& approx, const DenseMatrix& truth);

/// Relative error of the best rank-`rank` approximation of `data`.
double svd_baseline_error(const DenseMatrix& data, Index rank);

/// Y_L * Y_R with i.i.d. N(0, 1) factors, the test matrices of the
/// completion experiments.
DenseMatrix random_low_rank(Index n_rows, Index n_cols, Index rank, std::uint64_t seed);

/// Samples each entry of `truth` with probability `density`, adding
/// N(0, noise_std^2) to the observed values.
CompletionProblem sample_problem(const DenseMatrix& truth, Index rank, double density, double noise_std,
                                 std::uint64_t seed);

}  // namespace grouse
