#include "selfcal/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "selfcal/covariance.hpp"
#include "selfcal/errors.hpp"
#include "selfcal/linearize.hpp"

namespace selfcal {

namespace {

constexpr double kOracleThreshold = 0.1;
constexpr double kOracleEmptyColumn = 1e-8;
constexpr double kOracleFloor = 1e-12;

Pose rpy(double roll, double pitch, double yaw, const Vector3& t) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vector3::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Vector3::UnitY()) *
                               Eigen::AngleAxisd(roll, Vector3::UnitX());
  return Pose(q, t);
}

// Lissajous figure-8 in xy (4 s period) with a vertical sinusoid. Attitude
// oscillates hard on all three axes at distinct rates, up to ~0.75 rad per
// 20 Hz sample, so every keyframe carries a large rotation about a changing
// axis. That is what keeps the 5 mm / 0.5 deg per-step noise case accurate.
Pose figure8(double t) {
  const double w = 2.0 * std::numbers::pi / 4.0;
  const Vector3 p(3.0 * std::sin(w * t), 1.5 * std::sin(2.0 * w * t),
                  0.8 * std::sin(3.0 * w * t + 0.5));
  const double roll = 1.5 * std::sin(10.0 * t);
  const double pitch = 1.5 * std::sin(8.0 * t + 1.0);
  const double yaw = 1.5 * std::sin(6.0 * t + 0.3) + 0.5 * w * t;
  return rpy(roll, pitch, yaw, p);
}

// Ground vehicle on alternating arcs: yaw-only attitude, z fixed at 0.
Pose planar_arcs(double t) {
  const double yaw = 0.6 * t + 1.5 * std::sin(0.9 * t);
  const Vector3 p(4.0 * std::cos(0.3 * t) + 1.0 * std::cos(1.3 * t),
                  4.0 * std::sin(0.3 * t) + 1.0 * std::sin(1.1 * t), 0.0);
  return Pose(Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vector3::UnitZ())), p);
}

Pose straight_line(double t) { return Pose::from_translation(Vector3(1.0 * t, 0.0, 0.0)); }

Vector6 sample_twist(std::mt19937_64& rng, const NoiseModel& noise) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector6 w;
  for (int i = 0; i < 3; ++i) w[i] = noise.sigma_t * n01(rng);
  for (int i = 3; i < 6; ++i) w[i] = noise.sigma_r * n01(rng);
  return w;
}

}  // namespace

std::string_view to_string(Trajectory t) {
  switch (t) {
    case Trajectory::kFigure8: return "full_6dof_figure8";
    case Trajectory::kPlanarArcs: return "planar_arcs";
    case Trajectory::kStraightLine: return "straight_line";
  }
  return "unknown";
}

Trajectory trajectory_from_string(std::string_view s) {
  if (s == "full_6dof_figure8") return Trajectory::kFigure8;
  if (s == "planar_arcs") return Trajectory::kPlanarArcs;
  if (s == "straight_line") return Trajectory::kStraightLine;
  throw ConfigError(fmt::format("unknown trajectory '{}'", s));
}

void ScenarioSpec::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ConfigError(fmt::format("rate must be positive (got {})", rate));
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw ConfigError(fmt::format("duration must be non-negative (got {})", duration));
  }
  if (!(noise.sigma_t >= 0.0) || !(noise.sigma_r >= 0.0)) {
    throw ConfigError("noise sigmas must be non-negative");
  }
  if (reference_sensor.empty() || second_sensor.empty() || reference_sensor == second_sensor) {
    throw ConfigError("sensor names must be distinct and non-empty");
  }
  double prev = -std::numeric_limits<double>::infinity();
  for (const DriftEvent& e : drift_events) {
    if (!(e.t > prev)) throw ConfigError("drift event times must be strictly increasing");
    if (e.t < 0.0 || e.t > duration) {
      throw ConfigError(fmt::format("drift event at t={} outside [0, {}]", e.t, duration));
    }
    prev = e.t;
  }
}

Pose ScenarioSpec::theta_at(double t) const {
  Pose theta = theta_true;
  for (const DriftEvent& e : drift_events) {
    if (e.t <= t) theta = e.theta;
  }
  return theta;
}

Pose trajectory_pose(Trajectory trajectory, double t) {
  switch (trajectory) {
    case Trajectory::kFigure8: return figure8(t);
    case Trajectory::kPlanarArcs: return planar_arcs(t);
    case Trajectory::kStraightLine: return straight_line(t);
  }
  return Pose::identity();
}

std::vector<RelativePoseMeasurement> generate(const ScenarioSpec& spec) {
  spec.validate();
  const auto n = static_cast<long>(std::floor(spec.duration * spec.rate + 1e-9));
  const bool noisy = spec.noise.sigma_t > 0.0 || spec.noise.sigma_r > 0.0;
  std::optional<Matrix6> cov;
  if (spec.noise.sigma_t > 0.0 && spec.noise.sigma_r > 0.0) {
    cov = diagonal_covariance(spec.noise.sigma_t, spec.noise.sigma_r);
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<RelativePoseMeasurement> out;
  out.reserve(2 * static_cast<std::size_t>(std::max(n, 0L)));
  Pose prev = trajectory_pose(spec.trajectory, 0.0);
  for (long k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / spec.rate;
    const Pose cur = trajectory_pose(spec.trajectory, t);
    const Pose a = inverse(prev) * cur;
    const Pose theta = spec.theta_at(t);
    const Pose b = inverse(theta) * a * theta;
    prev = cur;

    Pose a_meas = a;
    Pose b_meas = b;
    if (noisy) {
      a_meas = a * Pose::exp(sample_twist(rng, spec.noise));
      b_meas = b * Pose::exp(sample_twist(rng, spec.noise));
    }
    out.push_back({t, spec.reference_sensor, a_meas, cov});
    out.push_back({t, spec.second_sensor, b_meas, cov});
  }
  return out;
}

std::vector<MotionPair> keyframe_all(std::span<const RelativePoseMeasurement> measurements,
                                     const KeyframerConfig& keyframing) {
  Keyframer kf(keyframing);
  std::vector<MotionPair> pairs;
  for (const auto& m : measurements) {
    auto emitted = kf.push(m);
    pairs.insert(pairs.end(), emitted.begin(), emitted.end());
  }
  auto rest = kf.flush();
  pairs.insert(pairs.end(), rest.begin(), rest.end());
  return pairs;
}

NullSpaceResult scaled_null_space(Eigen::MatrixXd a, double threshold) {
  const Eigen::Index n = a.cols();
  NullSpaceResult result;
  const Eigen::VectorXd norms = a.colwise().norm().transpose();
  const double max_norm = n > 0 ? norms.maxCoeff() : 0.0;
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // An empty column needs no scaling; it shows up as a zero singular value.
    scale[j] = norms[j] > kOracleEmptyColumn * max_norm && norms[j] > 0.0 ? 1.0 / norms[j] : 1.0;
  }
  a = a * scale.asDiagonal();

  if (a.rows() == 0) {
    result.singular_values = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) result.null_basis.push_back(Eigen::VectorXd::Unit(n, i));
    return result;
  }
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  result.singular_values = Eigen::VectorXd::Zero(n);
  result.singular_values.head(svd.singularValues().size()) = svd.singularValues();
  const double s1 = result.singular_values.size() ? result.singular_values[0] : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = result.singular_values[i];
    if (s1 > 0.0 && s >= threshold * s1 && s > kOracleFloor * s1) ++result.rank;
  }
  for (Eigen::Index i = result.rank; i < n; ++i) {
    Eigen::VectorXd v = scale.asDiagonal() * svd.matrixV().col(i);
    result.null_basis.push_back(v.normalized());
  }
  return result;
}

NullSpaceResult null_space_oracle(std::span<const MotionPair> pairs, const Pose& theta) {
  Eigen::MatrixXd a(6 * static_cast<Eigen::Index>(pairs.size()), 6);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    // Whiten with the inverse Cholesky factor: G = C C^T, rows C^-1 J.
    const Eigen::LLT<Matrix6> llt(pairs[i].cov_pair);
    Matrix6 block = jacobian(theta, pairs[i]);
    llt.matrixL().solveInPlace(block);
    a.middleRows(6 * static_cast<Eigen::Index>(i), 6) = block;
  }
  return scaled_null_space(std::move(a), kOracleThreshold);
}

NullSpaceResult null_space_oracle(std::span<const RelativePoseMeasurement> measurements,
                                  const Pose& theta, const KeyframerConfig& keyframing) {
  const std::vector<MotionPair> pairs = keyframe_all(measurements, keyframing);
  return null_space_oracle(pairs, theta);
}

}  // namespace selfcal
