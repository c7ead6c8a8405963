#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "selfcal/covariance.hpp"
#include "selfcal/geometry.hpp"
#include "selfcal/io.hpp"

namespace selfcal {

/// Time-aligned accumulated motions of the two sensors over one keyframe
/// interval. Ideally motion_a * theta == theta * motion_b.
struct MotionPair {
  double t_start = 0.0;
  double t_end = 0.0;
  Pose motion_a;  // reference sensor
  Pose motion_b;  // second sensor
  Matrix6 cov_pair = default_measurement_covariance() * 2.0;
};

struct KeyframerConfig {
  std::string reference_sensor = "front";
  std::string second_sensor = "back";
  double translation_threshold = 0.15;  // m
  double rotation_threshold = 0.1745;   // rad
  /// Used for measurements that carry no covariance.
  Matrix6 default_cov = default_measurement_covariance();
  /// Transport the accumulated covariance through the adjoint of each new
  /// delta instead of plain summation.
  bool adjoint_transport = false;
  /// Start time of each sensor's first delta.
  double origin = 0.0;
};

/// Compresses two high-rate relative-pose streams into MotionPairs.
///
/// The reference sensor's accumulated motion decides where keyframe intervals
/// end. The second sensor's motion over the same interval is composed from its
/// own deltas, splitting a delta that straddles an interval boundary by
/// geodesic interpolation. A closed interval is emitted once the second
/// sensor's samples reach its end time; until then it stays pending, which is
/// why a single push can emit zero, one, or several pairs.
class Keyframer {
 public:
  explicit Keyframer(KeyframerConfig config);

  /// Throws std::invalid_argument for an unknown sensor or a timestamp that
  /// does not increase for its sensor.
  std::vector<MotionPair> push(const RelativePoseMeasurement& m);

  /// Emits pending intervals and the partial accumulator. Intervals without at
  /// least one measurement from each sensor are dropped.
  std::vector<MotionPair> flush();

  [[nodiscard]] const KeyframerConfig& config() const { return config_; }
  [[nodiscard]] std::size_t pending() const { return closed_.size(); }

 private:
  struct Accumulator {
    Pose motion;
    Matrix6 cov = Matrix6::Zero();
    std::size_t count = 0;
    void add(const Pose& delta, const Matrix6& delta_cov, bool adjoint_transport);
  };
  struct ClosedInterval {
    double t_start;
    double t_end;
    Accumulator a;
  };
  // A second-sensor delta covering (t_prev, t].
  struct Slice {
    double t_prev;
    double t;
    Pose delta;
    Matrix6 cov;
  };

  std::vector<MotionPair> emit_ready();
  // Consumes second-sensor slices up to t_end. Returns false when nothing of
  // the second sensor fell inside the interval.
  bool take_second(double t_start, double t_end, Accumulator& b);

  KeyframerConfig config_;
  Accumulator ref_;
  double ref_start_;
  double ref_last_t_;
  bool ref_seen_ = false;
  std::deque<ClosedInterval> closed_;
  std::deque<Slice> second_;
  double second_last_t_;
  bool second_seen_ = false;
};

}  // namespace selfcal
