#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "selfcal/geometry.hpp"
#include "selfcal/io.hpp"
#include "selfcal/keyframer.hpp"

namespace selfcal {

enum class Trajectory { kFigure8, kPlanarArcs, kStraightLine };

[[nodiscard]] std::string_view to_string(Trajectory t);
/// Accepts full_6dof_figure8, planar_arcs and straight_line. Throws ConfigError.
[[nodiscard]] Trajectory trajectory_from_string(std::string_view s);

struct DriftEvent {
  double t = 0.0;
  Pose theta;
};

struct NoiseModel {
  double sigma_t = 0.0;  // m per step, per axis
  double sigma_r = 0.0;  // rad per step, per axis
};

struct ScenarioSpec {
  Trajectory trajectory = Trajectory::kFigure8;
  double duration = 60.0;  // s
  double rate = 20.0;      // Hz
  Pose theta_true;
  std::vector<DriftEvent> drift_events;
  NoiseModel noise;
  std::uint64_t seed = 0;
  std::string reference_sensor = "front";
  std::string second_sensor = "back";

  /// Throws ConfigError.
  void validate() const;
  /// Extrinsic in force at time t.
  [[nodiscard]] Pose theta_at(double t) const;
};

/// World pose of the reference sensor along the trajectory.
[[nodiscard]] Pose trajectory_pose(Trajectory trajectory, double t);

/// Samples the trajectory at `rate` (t = k / rate, k >= 1) and emits, per
/// sample, the reference delta followed by the second-sensor delta
/// theta^-1 * A * theta. Each delta is then perturbed on the right by an
/// independent Gaussian twist. Noisy streams carry their covariance;
/// noise-free ones leave it to the reader's default.
[[nodiscard]] std::vector<RelativePoseMeasurement> generate(const ScenarioSpec& spec);

struct NullSpaceResult {
  int rank = 0;
  std::vector<Eigen::VectorXd> null_basis;  // unit vectors in parameter coordinates
  Eigen::VectorXd singular_values;          // of the column-scaled matrix
};

/// Numerical rank of `a` after unit column scaling, counting singular values
/// at or above `threshold` times the largest, and the trailing right-singular
/// directions mapped back through the scaling.
[[nodiscard]] NullSpaceResult scaled_null_space(Eigen::MatrixXd a, double threshold);

/// Brute-force observability check over every pair at once: whitened,
/// column-scaled stacked Jacobian, SVD, rank at 0.1 relative to the largest
/// singular value.
[[nodiscard]] NullSpaceResult null_space_oracle(std::span<const MotionPair> pairs,
                                                const Pose& theta);
[[nodiscard]] NullSpaceResult null_space_oracle(
    std::span<const RelativePoseMeasurement> measurements, const Pose& theta,
    const KeyframerConfig& keyframing = {});

/// Keyframes a whole stream.
[[nodiscard]] std::vector<MotionPair> keyframe_all(
    std::span<const RelativePoseMeasurement> measurements, const KeyframerConfig& keyframing);

}  // namespace selfcal
