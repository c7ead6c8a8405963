#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "selfcal/geometry.hpp"
#include "selfcal/keyframer.hpp"

namespace selfcal {

using StackedJacobian = Eigen::Matrix<double, Eigen::Dynamic, 6>;

/// Hand-eye loop residual log(theta^-1 * A^-1 * theta * B). Zero exactly when
/// A * theta == theta * B.
[[nodiscard]] Twist residual(const Pose& theta, const MotionPair& pair);

/// d residual / d delta for the right perturbation theta * exp(delta),
/// columns in twist order.
[[nodiscard]] Matrix6 jacobian(const Pose& theta, const MotionPair& pair);

/// Residual and Jacobian of one pair, both pre-multiplied by L where
/// G^-1 = L^T L and G is the pair covariance.
struct WhitenedBlock {
  Matrix6 jacobian;
  Vector6 residual;
};
[[nodiscard]] WhitenedBlock whitened_block(const Pose& theta, const MotionPair& pair);

/// Whitened stacked system L*J (6n x 6) and L*r (6n) over all pairs.
struct LinearSystem {
  StackedJacobian jacobian;
  Eigen::VectorXd residual;

  LinearSystem() = default;
  explicit LinearSystem(std::size_t n_pairs)
      : jacobian(6 * static_cast<Eigen::Index>(n_pairs), 6),
        residual(6 * static_cast<Eigen::Index>(n_pairs)) {}

  [[nodiscard]] double cost() const { return residual.squaredNorm(); }
};

/// Below this many pairs the OpenMP kernels run on the calling thread.
inline constexpr std::size_t kParallelMinPairs = 32;

/// OpenMP kernels. Each pair owns its six rows, so the result is identical to
/// the serial reference regardless of thread count.
[[nodiscard]] LinearSystem linearize(std::span<const MotionPair> pairs, const Pose& theta);
[[nodiscard]] double whitened_cost(std::span<const MotionPair> pairs, const Pose& theta);

/// Serial reference implementations, kept for tests and benchmarks.
[[nodiscard]] LinearSystem linearize_serial(std::span<const MotionPair> pairs,
                                            const Pose& theta);
[[nodiscard]] double whitened_cost_serial(std::span<const MotionPair> pairs,
                                          const Pose& theta);

}  // namespace selfcal
