#include "selfcal/keyframer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace selfcal {

void Keyframer::Accumulator::add(const Pose& delta, const Matrix6& delta_cov,
                                 bool adjoint_transport) {
  motion = motion * delta;
  if (adjoint_transport) {
    // motion * exp(e) * delta == motion * delta * exp(Ad_{delta^-1} e)
    const Matrix6 ad = adjoint(delta.inverse());
    cov = ad * cov * ad.transpose() + delta_cov;
  } else {
    cov += delta_cov;
  }
  ++count;
}

Keyframer::Keyframer(KeyframerConfig config)
    : config_(std::move(config)),
      ref_start_(config_.origin),
      ref_last_t_(config_.origin),
      second_last_t_(config_.origin) {
  if (config_.reference_sensor == config_.second_sensor) {
    throw std::invalid_argument("keyframer: sensors must be distinct");
  }
  if (!(config_.translation_threshold > 0.0) || !(config_.rotation_threshold > 0.0)) {
    throw std::invalid_argument("keyframer: thresholds must be positive");
  }
}

std::vector<MotionPair> Keyframer::push(const RelativePoseMeasurement& m) {
  const Matrix6& cov = m.cov ? *m.cov : config_.default_cov;
  if (m.sensor_id == config_.reference_sensor) {
    if (ref_seen_ && !(m.t > ref_last_t_)) {
      throw std::invalid_argument(fmt::format(
          "keyframer: non-monotone timestamp {} for sensor \"{}\"", m.t, m.sensor_id));
    }
    if (!ref_seen_) ref_start_ = std::min(ref_start_, m.t);
    ref_seen_ = true;
    ref_last_t_ = m.t;
    ref_.add(m.delta, cov, config_.adjoint_transport);
    if (ref_.motion.translation().norm() >= config_.translation_threshold ||
        ref_.motion.angle() >= config_.rotation_threshold) {
      closed_.push_back({ref_start_, m.t, ref_});
      ref_ = Accumulator{};
      ref_start_ = m.t;
    }
  } else if (m.sensor_id == config_.second_sensor) {
    if (second_seen_ && !(m.t > second_last_t_)) {
      throw std::invalid_argument(fmt::format(
          "keyframer: non-monotone timestamp {} for sensor \"{}\"", m.t, m.sensor_id));
    }
    const double t_prev = second_seen_ ? second_last_t_ : std::min(config_.origin, m.t);
    second_.push_back({t_prev, m.t, m.delta, cov});
    second_seen_ = true;
    second_last_t_ = m.t;
  } else {
    throw std::invalid_argument(
        fmt::format("keyframer: unknown sensor \"{}\"", m.sensor_id));
  }
  return emit_ready();
}

bool Keyframer::take_second(double t_start, double t_end, Accumulator& b) {
  while (!second_.empty()) {
    Slice& s = second_.front();
    if (s.t <= t_start && s.t_prev < t_start) {
      second_.pop_front();  // entirely before the interval
      continue;
    }
    if (s.t_prev >= t_end && s.t > t_end) break;
    if (s.t_prev < t_start) {
      const double alpha = (t_start - s.t_prev) / (s.t - s.t_prev);
      const Pose head = interpolate(s.delta, alpha);
      s.delta = head.inverse() * s.delta;
      s.cov *= 1.0 - alpha;
      s.t_prev = t_start;
    }
    if (s.t <= t_end) {
      b.add(s.delta, s.cov, config_.adjoint_transport);
      second_.pop_front();
      continue;
    }
    const double alpha = (t_end - s.t_prev) / (s.t - s.t_prev);
    const Pose part = interpolate(s.delta, alpha);
    b.add(part, alpha * s.cov, config_.adjoint_transport);
    s.delta = part.inverse() * s.delta;
    s.cov *= 1.0 - alpha;
    s.t_prev = t_end;
    break;
  }
  return b.count > 0;
}

std::vector<MotionPair> Keyframer::emit_ready() {
  std::vector<MotionPair> out;
  while (!closed_.empty() && second_seen_ && second_last_t_ >= closed_.front().t_end) {
    const ClosedInterval iv = closed_.front();
    closed_.pop_front();
    Accumulator b;
    if (take_second(iv.t_start, iv.t_end, b)) {
      out.push_back({iv.t_start, iv.t_end, iv.a.motion, b.motion, iv.a.cov + b.cov});
    }
  }
  return out;
}

std::vector<MotionPair> Keyframer::flush() {
  std::vector<MotionPair> out = emit_ready();
  while (!closed_.empty()) {
    const ClosedInterval iv = closed_.front();
    closed_.pop_front();
    Accumulator b;
    if (take_second(iv.t_start, iv.t_end, b)) {
      out.push_back({iv.t_start, iv.t_end, iv.a.motion, b.motion, iv.a.cov + b.cov});
    }
  }
  if (ref_.count > 0) {
    Accumulator b;
    if (take_second(ref_start_, ref_last_t_, b)) {
      out.push_back({ref_start_, ref_last_t_, ref_.motion, b.motion, ref_.cov + b.cov});
    }
    ref_ = Accumulator{};
    ref_start_ = ref_last_t_;
  }
  return out;
}

}  // namespace selfcal
