#include "grouse/tracker.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "grouse/random.hpp"

namespace grouse {

StepSchedule StepSchedule::diminishing(double c) {
  StepSchedule s{ScheduleKind::Diminishing, c};
  s.validate();
  return s;
}

StepSchedule StepSchedule::constant(double c) {
  StepSchedule s{ScheduleKind::Constant, c};
  s.validate();
  return s;
}

void StepSchedule::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("step schedule constant must be positive, got " + std::to_string(c));
  }
}

double eta_for_step(const StepSchedule& schedule, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("eta_for_step: t must be >= 1");
  switch (schedule.kind) {
    case ScheduleKind::Diminishing:
      return schedule.c / static_cast<double>(t);
    case ScheduleKind::Constant:
      return schedule.c;
  }
  return schedule.c;
}

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::Diminishing ? "diminishing" : "constant";
}

std::string_view to_string(RankPolicy policy) {
  return policy == RankPolicy::Skip ? "skip" : "min_norm";
}

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::None: return "none";
    case SkipReason::TooFewSamples: return "too_few_samples";
    case SkipReason::RankDeficient: return "rank_deficient";
    case SkipReason::NegligibleResidual: return "negligible_residual";
  }
  return "unknown";
}

void TrackerConfig::validate() const {
  schedule.validate();
  if (!(min_samples_factor >= 1.0)) {
    throw std::invalid_argument("min_samples_factor must be >= 1");
  }
  if (!(residual_tol > 0.0)) {
    throw std::invalid_argument("residual_tol must be positive");
  }
}

SubspaceEstimate new_tracker(Index n, Index d, std::uint64_t seed) {
  if (d < 1 || d >= n) {
    throw std::invalid_argument("new_tracker: need 1 <= d < n (n=" + std::to_string(n) +
                                ", d=" + std::to_string(d) + ")");
  }
  Rng rng(seed);
  return SubspaceEstimate{orthonormalize(rng.normal_matrix(n, d)), 0};
}

namespace {

void check_observation(const SubspaceEstimate& state, const MaskedVector& obs) {
  if (obs.ambient_dim != state.ambient_dim()) {
    throw std::invalid_argument("observation dimension " + std::to_string(obs.ambient_dim) +
                                " != tracker dimension " + std::to_string(state.ambient_dim()));
  }
  if (static_cast<std::size_t>(obs.values.size()) != obs.support.size()) {
    throw std::invalid_argument("observation values/support size mismatch");
  }
  if (!obs.values.allFinite()) {
    throw std::invalid_argument("observation contains non-finite values");
  }
}

// w, p = U w, and r = v_Omega - p_Omega for one observation.
struct Projection {
  LeastSquaresResult ls;
  Vector predicted;
  Vector residual;
};

Projection project(const DenseMatrix& basis, const MaskedVector& obs) {
  Projection out;
  out.ls = masked_least_squares(basis, obs);
  out.predicted = basis * out.ls.weights;
  out.residual.resize(obs.values.size());
  for (std::size_t k = 0; k < obs.support.size(); ++k) {
    const auto i = static_cast<Index>(k);
    out.residual[i] = obs.values[i] - out.predicted[obs.support[k]];
  }
  return out;
}

}  // namespace

void apply_geodesic_update(DenseMatrix& basis, const Vector& weights, const Vector& predicted,
                           const IndexSet& support, const Vector& residual, double angle) {
  const double w_norm = weights.norm();
  const double p_norm = predicted.norm();
  const double r_norm = residual.norm();
  const Vector w_hat = weights / w_norm;
  // U += ((cos(angle) - 1) p/||p|| + sin(angle) r/||r||) w^T/||w||
  basis.noalias() += ((std::cos(angle) - 1.0) / p_norm) * predicted * w_hat.transpose();
  const double r_scale = std::sin(angle) / r_norm;
  for (std::size_t k = 0; k < support.size(); ++k) {
    basis.row(support[k]) += (r_scale * residual[static_cast<Index>(k)]) * w_hat.transpose();
  }
}

UpdateReport grouse_step(SubspaceEstimate& state, const MaskedVector& obs, const TrackerConfig& config) {
  check_observation(state, obs);
  config.validate();
  UpdateReport report;
  report.t = ++state.step_count;
  report.eta = eta_for_step(config.schedule, report.t);
  report.observed_norm = obs.values.norm();

  const Index d = state.rank();
  if (obs.support.empty()) {
    report.weights = Vector::Zero(d);
    report.predicted = Vector::Zero(state.ambient_dim());
    report.skipped = true;
    report.skip_reason = SkipReason::TooFewSamples;
    return report;
  }

  Projection proj = project(state.basis, obs);
  report.weights = proj.ls.weights;
  report.predicted_norm = proj.predicted.norm();
  report.residual_norm = proj.residual.norm();
  report.sigma = report.residual_norm * report.predicted_norm;
  report.residual = std::move(proj.residual);
  report.predicted = std::move(proj.predicted);

  auto skip = [&](SkipReason reason) {
    report.skipped = true;
    report.skip_reason = reason;
    return report;
  };

  if (static_cast<double>(obs.support.size()) <= config.min_samples_factor * static_cast<double>(d)) {
    return skip(SkipReason::TooFewSamples);
  }
  if (!proj.ls.rank_ok && config.rank_policy == RankPolicy::Skip) {
    return skip(SkipReason::RankDeficient);
  }
  const double w_norm = report.weights.norm();
  if (w_norm == 0.0 ||
      report.sigma < config.residual_tol * report.observed_norm * report.observed_norm) {
    return skip(SkipReason::NegligibleResidual);
  }
  if (std::abs(report.predicted_norm - w_norm) > 1e-6 * w_norm) {
    throw std::runtime_error("grouse_step: basis lost orthonormality (||p|| = " +
                             std::to_string(report.predicted_norm) + ", ||w|| = " +
                             std::to_string(w_norm) + ")");
  }

  apply_geodesic_update(state.basis, report.weights, report.predicted, obs.support, report.residual,
                        report.sigma * report.eta);
  return report;
}

double evaluate_cost(const SubspaceEstimate& state, const MaskedVector& obs) {
  check_observation(state, obs);
  if (obs.support.empty()) return 0.0;
  return project(state.basis, obs).residual.squaredNorm();
}

DenseMatrix euclidean_gradient(const SubspaceEstimate& state, const MaskedVector& obs, RankPolicy policy) {
  check_observation(state, obs);
  DenseMatrix grad = DenseMatrix::Zero(state.ambient_dim(), state.rank());
  if (obs.support.empty()) return grad;
  const Projection proj = project(state.basis, obs);
  if (!proj.ls.rank_ok && policy == RankPolicy::Skip) {
    throw std::domain_error("euclidean_gradient: U restricted to the support is rank deficient");
  }
  for (std::size_t k = 0; k < obs.support.size(); ++k) {
    grad.row(obs.support[k]) = -2.0 * proj.residual[static_cast<Index>(k)] * proj.ls.weights.transpose();
  }
  return grad;
}

DenseMatrix rotation_form_step(const SubspaceEstimate& state, const MaskedVector& obs, double eta) {
  check_observation(state, obs);
  if (obs.support.empty()) throw std::domain_error("rotation_form_step: empty support");
  const Projection proj = project(state.basis, obs);
  const double r_norm = proj.residual.norm();
  const double w_norm = proj.ls.weights.norm();
  if (r_norm == 0.0 || w_norm == 0.0) {
    throw std::domain_error("rotation_form_step: degenerate step (zero residual or weights)");
  }
  const Index n = state.ambient_dim();
  const Index d = state.rank();
  const double angle = r_norm * proj.predicted.norm() * eta;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Vector w_hat = proj.ls.weights / w_norm;

  DenseMatrix extended = DenseMatrix::Zero(n, d + 1);
  extended.leftCols(d) = state.basis;
  for (std::size_t k = 0; k < obs.support.size(); ++k) {
    extended(obs.support[k], d) = proj.residual[static_cast<Index>(k)] / r_norm;
  }

  DenseMatrix rotation(d + 1, d + 1);
  rotation.topLeftCorner(d, d) = DenseMatrix::Identity(d, d) - (1.0 - c) * w_hat * w_hat.transpose();
  rotation.topRightCorner(d, 1) = -s * w_hat;
  rotation.bottomLeftCorner(1, d) = s * w_hat.transpose();
  rotation(d, d) = c;

  return (extended * rotation).leftCols(d);
}

double residual_signal(const UpdateReport& report) {
  if (report.observed_norm == 0.0) return 0.0;
  return report.residual_norm / report.observed_norm;
}

Tracker::Tracker(Index n, Index d, std::uint64_t seed, TrackerConfig config)
    : Tracker(new_tracker(n, d, seed), config) {}

Tracker::Tracker(SubspaceEstimate state, TrackerConfig config)
    : state_(std::move(state)), config_(config) {
  config_.validate();
}

}  // namespace grouse
