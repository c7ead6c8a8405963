#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "selfcal/geometry.hpp"
#include "selfcal/keyframer.hpp"
#include "selfcal/linearize.hpp"

namespace selfcal {

/// Variance reported along directions the data does not constrain.
inline constexpr double kUnobservableVariance = 1e12;

/// Columns whose norm falls below this fraction of the largest column norm
/// carry no information and are excluded from the update.
inline constexpr double kZeroColumnTolerance = 1e-8;

/// Singular values below this fraction of the largest one are never retained,
/// whatever the truncation threshold.
inline constexpr double kRankFloor = 1e-12;

struct SolveOptions {
  /// Keep singular values with s_i / s_1 >= tsvd_threshold (after column
  /// scaling). Zero keeps every non-degenerate direction.
  double tsvd_threshold = 0.1;
  int max_iterations = 20;
  double step_tolerance = 1e-10;
  bool use_tsvd = true;

  /// Throws ConfigError.
  void validate() const;
};

struct IterationRecord {
  double cost_before = 0.0;
  double cost_after = 0.0;
  Vector6 step = Vector6::Zero();  // full Gauss-Newton step before backtracking
  double step_scale = 1.0;         // backtracking factor applied to `step`
  int rank = 0;
};

struct CalibrationEstimate {
  Pose theta;  // pose of the second sensor in the reference sensor frame
  Matrix6 cov = kUnobservableVariance * Matrix6::Identity();
  double entropy = 0.0;  // nats, over the retained subspace
  Vector6 obs_scores = Vector6::Zero();
  int numerical_rank = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;
};

/// SVD of the column-scaled whitened Jacobian (L J S = U diag(s) V^T).
struct ScaledSvd {
  Vector6 scale = Vector6::Zero();  // diagonal of S; zero for empty columns
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd u;
  Matrix6 v = Matrix6::Identity();
  int rank = 0;

  /// sum_{i<rank} V(j,i)^2 per parameter direction j.
  [[nodiscard]] Vector6 observability() const;
};

[[nodiscard]] ScaledSvd decompose(const StackedJacobian& whitened_jacobian,
                                  double threshold);

/// Truncated update -S * sum_{i<rank} v_i (u_i^T b) / s_i.
[[nodiscard]] Vector6 tsvd_step(const ScaledSvd& svd, const Eigen::VectorXd& whitened_residual);

/// Full normal-equation update. Throws NumericalError when J^T G^-1 J is singular.
[[nodiscard]] Vector6 normal_equation_step(const LinearSystem& sys);

/// Covariance on the retained subspace with kUnobservableVariance along the
/// orthogonal complement.
[[nodiscard]] Matrix6 retained_covariance(const ScaledSvd& svd);

/// Differential entropy of the retained-subspace Gaussian; +inf for rank 0.
[[nodiscard]] double retained_entropy(const ScaledSvd& svd);

/// Gauss-Newton on SE(3) with observability-aware truncated updates.
/// Throws std::invalid_argument on empty input and NumericalError when a pair
/// covariance is not positive-definite. Non-convergence is reported through
/// CalibrationEstimate::converged.
[[nodiscard]] CalibrationEstimate solve(std::span<const MotionPair> pairs, const Pose& init,
                                        const SolveOptions& opts = {});

/// 0.5 * ln det(2 pi e cov). Throws NumericalError if cov is not PD.
[[nodiscard]] double entropy_of(const Matrix6& cov);

/// Fisher information J^T G^-1 J at theta.
[[nodiscard]] Matrix6 fim(std::span<const MotionPair> pairs, const Pose& theta);

}  // namespace selfcal
