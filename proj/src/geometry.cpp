#include "selfcal/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "selfcal/errors.hpp"

namespace selfcal {
namespace {

// Below this angle the SE(3) Jacobian Q-block coefficients switch to their
// Taylor series; the closed forms lose ~eps/theta^4 relative accuracy.
constexpr double kJacobianSeriesAngle = 1e-3;

Matrix3 se3_q_block(const Vector3& rho, const Vector3& phi) {
  const double theta = phi.norm();
  const double theta2 = theta * theta;
  double c1;
  double c2;
  double c3;
  if (theta < kJacobianSeriesAngle) {
    c1 = 1.0 / 6.0 - theta2 / 120.0;
    c2 = 1.0 / 24.0 - theta2 / 720.0;
    c3 = 1.0 / 120.0 - theta2 / 2520.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double theta3 = theta2 * theta;
    c1 = (theta - s) / theta3;
    c2 = (theta2 + 2.0 * c - 2.0) / (2.0 * theta3 * theta);
    c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * theta3 * theta2);
  }
  const Matrix3 P = skew(phi);
  const Matrix3 R = skew(rho);
  const Matrix3 PR = P * R;
  const Matrix3 RP = R * P;
  const Matrix3 PRP = PR * P;
  const Matrix3 PP = P * P;
  return 0.5 * R + c1 * (PR + RP + PRP) + c2 * (PP * R + RP * P - 3.0 * PRP) +
         c3 * (PRP * P + PP * RP);
}

}  // namespace

Pose::Pose(const Eigen::Quaterniond& rotation, const Vector3& translation)
    : q_(rotation), t_(translation) {
  // Leave unit quaternions untouched so serialized poses read back bit-exact.
  if (std::abs(q_.squaredNorm() - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
    q_.normalize();
  }
  if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
}

Pose Pose::from_axis_angle(const Vector3& axis, double angle,
                           const Vector3& translation) {
  return {Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())),
          translation};
}

Eigen::Quaterniond so3_exp(const Vector3& phi) {
  const double theta = phi.norm();
  if (theta < kSmallAngle) {
    const double theta2 = theta * theta;
    const Vector3 v = (0.5 - theta2 / 48.0) * phi;
    return Eigen::Quaterniond(1.0 - theta2 / 8.0, v.x(), v.y(), v.z())
        .normalized();
  }
  const double half = 0.5 * theta;
  const Vector3 v = (std::sin(half) / theta) * phi;
  return {std::cos(half), v.x(), v.y(), v.z()};
}

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Matrix3 so3_left_jacobian(const Vector3& phi) {
  const double theta = phi.norm();
  const double theta2 = theta * theta;
  double a;
  double b;
  if (theta < kSmallAngle) {
    a = 0.5 - theta2 / 24.0;
    b = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double sh = std::sin(0.5 * theta);
    a = 2.0 * sh * sh / theta2;
    b = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Matrix3 P = skew(phi);
  return Matrix3::Identity() + a * P + b * P * P;
}

Matrix3 so3_left_jacobian_inverse(const Vector3& phi) {
  const double theta = phi.norm();
  const double theta2 = theta * theta;
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double half = 0.5 * theta;
    c = (1.0 - half * std::cos(half) / std::sin(half)) / theta2;
  }
  const Matrix3 P = skew(phi);
  return Matrix3::Identity() - 0.5 * P + c * P * P;
}

Pose Pose::exp(const Twist& xi) {
  const Vector3 rho = xi.head<3>();
  const Vector3 phi = xi.tail<3>();
  return {so3_exp(phi), so3_left_jacobian(phi) * rho};
}

double Pose::angle() const {
  return 2.0 * std::atan2(q_.vec().norm(), q_.w());
}

Vector3 Pose::rotation_vector() const {
  const double n = q_.vec().norm();
  const double w = q_.w();
  const double theta = 2.0 * std::atan2(n, w);
  if (theta < kSmallAngle) {
    // 2 atan(n / w) / n expanded around n = 0
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * q_.vec();
  }
  return (theta / n) * q_.vec();
}

Twist Pose::log() const {
  if (q_.w() < 1e-15) throw NumericalError("log branch undefined");
  const Vector3 phi = rotation_vector();
  Twist xi;
  xi.head<3>() = so3_left_jacobian_inverse(phi) * t_;
  xi.tail<3>() = phi;
  return xi;
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond qi = q_.conjugate();
  return {qi, -(qi * t_)};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_matrix();
  m.topRightCorner<3, 1>() = t_;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation() * b.rotation(),
          a.translation() + a.rotation() * b.translation()};
}

Pose interpolate(const Pose& p, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("interpolate: alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return Pose::identity();
  if (alpha == 1.0) return p;
  return Pose::exp(alpha * p.log());
}

Matrix6 adjoint(const Pose& p) {
  const Matrix3 R = p.rotation_matrix();
  Matrix6 ad = Matrix6::Zero();
  ad.topLeftCorner<3, 3>() = R;
  ad.topRightCorner<3, 3>() = skew(p.translation()) * R;
  ad.bottomRightCorner<3, 3>() = R;
  return ad;
}

Matrix6 se3_left_jacobian_inverse(const Twist& xi) {
  const Vector3 rho = xi.head<3>();
  const Vector3 phi = xi.tail<3>();
  const Matrix3 j_inv = so3_left_jacobian_inverse(phi);
  Matrix6 out = Matrix6::Zero();
  out.topLeftCorner<3, 3>() = j_inv;
  out.topRightCorner<3, 3>() = -j_inv * se3_q_block(rho, phi) * j_inv;
  out.bottomRightCorner<3, 3>() = j_inv;
  return out;
}

Matrix6 se3_right_jacobian_inverse(const Twist& xi) {
  return se3_left_jacobian_inverse(-xi);
}

double twist_distance(const Pose& a, const Pose& b) {
  return compose(a.inverse(), b).log().norm();
}

}  // namespace selfcal
