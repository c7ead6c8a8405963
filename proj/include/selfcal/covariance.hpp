#pragma once

#include "selfcal/geometry.hpp"

namespace selfcal {

/// Per-measurement noise used when a stream omits "cov".
inline constexpr double kDefaultSigmaTranslation = 0.005;  // m
inline constexpr double kDefaultSigmaRotation = 0.0087;    // rad

/// diag(st^2, st^2, st^2, sr^2, sr^2, sr^2) in twist order.
[[nodiscard]] inline Matrix6 diagonal_covariance(double sigma_t, double sigma_r) {
  Vector6 d;
  d << Vector3::Constant(sigma_t * sigma_t), Vector3::Constant(sigma_r * sigma_r);
  return d.asDiagonal();
}

[[nodiscard]] inline Matrix6 default_measurement_covariance() {
  return diagonal_covariance(kDefaultSigmaTranslation, kDefaultSigmaRotation);
}

/// True when `cov` is symmetric within `tol` and its Cholesky factorization
/// succeeds.
[[nodiscard]] bool is_symmetric_positive_definite(const Matrix6& cov,
                                                  double tol = 1e-9);

}  // namespace selfcal
