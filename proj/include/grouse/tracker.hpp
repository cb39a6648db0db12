#pragma once

// Incremental gradient descent on the Grassmannian from partially observed
// vectors. Each step solves a masked least-squares problem for the weights w,
// forms the prediction p = U w and the residual r on the observed entries,
// and rotates U along the geodesic in the rank-one direction r w^T.

#include <cstdint>
#include <string_view>

#include "grouse/linalg.hpp"

namespace grouse {

enum class ScheduleKind { Diminishing, Constant };

/// eta_t = c / t (Diminishing) or eta_t = c (Constant); c > 0.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::Diminishing;
  double c = 1.0;

  static StepSchedule diminishing(double c);
  static StepSchedule constant(double c);
  void validate() const;

  bool operator==(const StepSchedule&) const = default;
};

double eta_for_step(const StepSchedule& schedule, std::int64_t t);

enum class RankPolicy { Skip, MinNorm };
enum class SkipReason { None, TooFewSamples, RankDeficient, NegligibleResidual };

std::string_view to_string(ScheduleKind kind);
std::string_view to_string(RankPolicy policy);
std::string_view to_string(SkipReason reason);

struct TrackerConfig {
  StepSchedule schedule;
  /// A step updates only when |Omega| > min_samples_factor * d.
  double min_samples_factor = 1.0;
  /// A step is skipped when ||r|| ||p|| < residual_tol * ||v_Omega||^2.
  double residual_tol = 1e-14;
  RankPolicy rank_policy = RankPolicy::Skip;

  void validate() const;

  bool operator==(const TrackerConfig&) const = default;
};

/// Orthonormal n x d basis plus the number of vectors presented so far.
struct SubspaceEstimate {
  DenseMatrix basis;
  std::int64_t step_count = 0;

  Index ambient_dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
};

struct UpdateReport {
  std::int64_t t = 0;
  Vector weights;
  /// Prediction p = U_t w with the pre-update basis.
  Vector predicted;
  /// Residual on the observed support (zero elsewhere).
  Vector residual;
  double predicted_norm = 0.0;
  double residual_norm = 0.0;
  double observed_norm = 0.0;
  double sigma = 0.0;
  double eta = 0.0;
  bool skipped = false;
  SkipReason skip_reason = SkipReason::None;
};

/// Random starting point: orthonormalized standard-normal n x d matrix.
/// Throws std::invalid_argument unless 1 <= d < n.
SubspaceEstimate new_tracker(Index n, Index d, std::uint64_t seed);

/// One GROUSE update in place. Degenerate steps leave the basis untouched and
/// say why in the report. Throws std::invalid_argument on dimension mismatch or
/// non-finite observations.
UpdateReport grouse_step(SubspaceEstimate& state, const MaskedVector& obs, const TrackerConfig& config);

/// The geodesic update itself, for given w, p, sparse r and angle sigma * eta.
void apply_geodesic_update(DenseMatrix& basis, const Vector& weights, const Vector& predicted,
                           const IndexSet& support, const Vector& residual, double angle);

/// min_a ||U_Omega a - v_Omega||^2.
double evaluate_cost(const SubspaceEstimate& state, const MaskedVector& obs);

/// dF/dU = -2 r w^T as a dense n x d matrix. Throws std::domain_error for a
/// rank-deficient U_Omega under RankPolicy::Skip.
DenseMatrix euclidean_gradient(const SubspaceEstimate& state, const MaskedVector& obs,
                               RankPolicy policy = RankPolicy::Skip);

/// First d columns of [U, r/||r||] R_eta, where R_eta is the (d+1) x (d+1)
/// plane rotation by sigma * eta mixing w/||w|| with the residual direction.
/// Same result as grouse_step computed through an explicit rotation; used as a
/// cross-check. Throws std::domain_error when r or w vanish.
DenseMatrix rotation_form_step(const SubspaceEstimate& state, const MaskedVector& obs, double eta);

/// ||r|| / ||v_Omega||; 0 when nothing was observed.
double residual_signal(const UpdateReport& report);

/// Convenience owner of a basis and its configuration.
class Tracker {
 public:
  Tracker(Index n, Index d, std::uint64_t seed, TrackerConfig config);
  Tracker(SubspaceEstimate state, TrackerConfig config);

  UpdateReport step(const MaskedVector& obs) { return grouse_step(state_, obs, config_); }

  const SubspaceEstimate& state() const { return state_; }
  const DenseMatrix& basis() const { return state_.basis; }
  const TrackerConfig& config() const { return config_; }

 private:
  SubspaceEstimate state_;
  TrackerConfig config_;
};

}  // namespace grouse
