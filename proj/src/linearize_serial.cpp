// Residual model and the serial reference kernels.

#include <Eigen/Cholesky>

#include "selfcal/errors.hpp"
#include "selfcal/linearize.hpp"

namespace selfcal {

Twist residual(const Pose& theta, const MotionPair& pair) {
  const Pose theta_inv = theta.inverse();
  return (theta_inv * pair.motion_a.inverse() * theta * pair.motion_b).log();
}

Matrix6 jacobian(const Pose& theta, const MotionPair& pair) {
  // E(theta exp(d)) = exp(-d) * E * exp(Ad_{B^-1} d), so to first order
  // r(d) = r + Jr^-1(r) Ad_{B^-1} d - Jl^-1(r) d, and Jl^-1(r) = Jr^-1(r) Ad_{E^-1}.
  const Pose loop = theta.inverse() * pair.motion_a.inverse() * theta * pair.motion_b;
  const Twist r = loop.log();
  return se3_right_jacobian_inverse(r) *
         (adjoint(pair.motion_b.inverse()) - adjoint(loop.inverse()));
}

WhitenedBlock whitened_block(const Pose& theta, const MotionPair& pair) {
  const Eigen::LLT<Matrix6> llt(pair.cov_pair);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("pair covariance is not positive-definite");
  }
  const Pose loop = theta.inverse() * pair.motion_a.inverse() * theta * pair.motion_b;
  const Twist r = loop.log();
  const Matrix6 j = se3_right_jacobian_inverse(r) *
                    (adjoint(pair.motion_b.inverse()) - adjoint(loop.inverse()));
  // G = C C^T  =>  G^-1 = C^-T C^-1, so L = C^-1.
  return {llt.matrixL().solve(j), llt.matrixL().solve(r)};
}

LinearSystem linearize_serial(std::span<const MotionPair> pairs, const Pose& theta) {
  LinearSystem sys(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto row = 6 * static_cast<Eigen::Index>(i);
    const WhitenedBlock block = whitened_block(theta, pairs[i]);
    sys.jacobian.middleRows<6>(row) = block.jacobian;
    sys.residual.segment<6>(row) = block.residual;
  }
  return sys;
}

double whitened_cost_serial(std::span<const MotionPair> pairs, const Pose& theta) {
  double cost = 0.0;
  for (const MotionPair& pair : pairs) {
    const Eigen::LLT<Matrix6> llt(pair.cov_pair);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("pair covariance is not positive-definite");
    }
    cost += llt.matrixL().solve(residual(theta, pair)).squaredNorm();
  }
  return cost;
}

}  // namespace selfcal
