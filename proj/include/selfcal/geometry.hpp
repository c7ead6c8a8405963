#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace selfcal {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// se(3) tangent vector ordered [rho; phi]: translation part first, rotation
/// part second. Jacobian columns and observability indices use this order.
using Twist = Vector6;

/// Angles below this use the series expansions in exp/log.
inline constexpr double kSmallAngle = 1e-6;

/// Rigid-body transform in SE(3) stored as a unit quaternion and a translation.
///
/// The quaternion is renormalized on construction and its scalar part is kept
/// non-negative, so every rotation has exactly one representation.
class Pose {
 public:
  Pose() = default;
  Pose(const Eigen::Quaterniond& rotation, const Vector3& translation);

  static Pose identity() { return {}; }
  static Pose from_translation(const Vector3& t) {
    return {Eigen::Quaterniond::Identity(), t};
  }
  static Pose from_rotation(const Eigen::Quaterniond& q) {
    return {q, Vector3::Zero()};
  }
  /// Rotation of `angle` radians about `axis` (normalized internally).
  static Pose from_axis_angle(const Vector3& axis, double angle,
                              const Vector3& translation = Vector3::Zero());

  /// se(3) exponential map.
  static Pose exp(const Twist& xi);

  /// se(3) logarithm on the principal branch. Throws NumericalError when the
  /// rotation angle is pi.
  [[nodiscard]] Twist log() const;

  [[nodiscard]] const Eigen::Quaterniond& rotation() const { return q_; }
  [[nodiscard]] Matrix3 rotation_matrix() const { return q_.toRotationMatrix(); }
  [[nodiscard]] const Vector3& translation() const { return t_; }

  /// Rotation angle in [0, pi].
  [[nodiscard]] double angle() const;
  /// so(3) logarithm of the rotation part (axis times angle).
  [[nodiscard]] Vector3 rotation_vector() const;

  [[nodiscard]] Pose inverse() const;
  [[nodiscard]] Eigen::Matrix4d matrix() const;

  /// Applies the transform to a point.
  [[nodiscard]] Vector3 operator*(const Vector3& p) const { return q_ * p + t_; }

 private:
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
  Vector3 t_ = Vector3::Zero();
};

/// Group product a * b.
[[nodiscard]] Pose compose(const Pose& a, const Pose& b);
[[nodiscard]] inline Pose operator*(const Pose& a, const Pose& b) {
  return compose(a, b);
}
[[nodiscard]] inline Pose inverse(const Pose& p) { return p.inverse(); }

/// Geodesic interpolation from identity towards p: exp(alpha * log(p)).
/// Throws std::invalid_argument for alpha outside [0, 1].
[[nodiscard]] Pose interpolate(const Pose& p, double alpha);

[[nodiscard]] Matrix3 skew(const Vector3& v);

/// SO(3) exponential of a rotation vector.
[[nodiscard]] Eigen::Quaterniond so3_exp(const Vector3& phi);

/// Left Jacobian of SO(3) and its inverse (the V matrix of the SE(3)
/// exponential and its inverse).
[[nodiscard]] Matrix3 so3_left_jacobian(const Vector3& phi);
[[nodiscard]] Matrix3 so3_left_jacobian_inverse(const Vector3& phi);

/// Adjoint of p acting on twists in [rho; phi] order:
/// exp(Ad_p xi) = p * exp(xi) * p^-1.
[[nodiscard]] Matrix6 adjoint(const Pose& p);

/// Inverse left and right Jacobians of SE(3).
///   log(exp(-d) * exp(xi)) ~ xi - Jl^-1(xi) d
///   log(exp(xi) * exp(d))  ~ xi + Jr^-1(xi) d
[[nodiscard]] Matrix6 se3_left_jacobian_inverse(const Twist& xi);
[[nodiscard]] Matrix6 se3_right_jacobian_inverse(const Twist& xi);

/// Norm of log(a^-1 b); the se(3) distance used for convergence checks.
[[nodiscard]] double twist_distance(const Pose& a, const Pose& b);

}  // namespace selfcal
