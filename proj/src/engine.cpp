#include "selfcal/engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "selfcal/errors.hpp"

namespace selfcal {

void EngineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(fmt::format("{} must be positive (got {})", name, v));
  };
  if (!(tsvd_threshold > 0.0 && tsvd_threshold < 1.0)) {
    throw ConfigError(fmt::format("tsvd threshold must lie in (0, 1) (got {})", tsvd_threshold));
  }
  positive(max_entropy, "max entropy");
  if (pq_size == 0) throw ConfigError("priority queue size must be positive");
  if (window_size == 0) throw ConfigError("window size must be positive");
  positive(kf_translation, "keyframe translation");
  positive(kf_rotation, "keyframe rotation");
  positive(decay_lambda, "decay rate");
  if (same_count < 1) throw ConfigError("same-count must be at least 1");
  positive(min_update, "minimum update");
  positive(sigma_t, "sigma_t");
  positive(sigma_r, "sigma_r");
  if (reference_sensor.empty() || second_sensor.empty() ||
      reference_sensor == second_sensor) {
    throw ConfigError("reference and second sensor must be distinct non-empty names");
  }
  solve_options().validate();
}

SolveOptions EngineConfig::solve_options() const {
  SolveOptions o;
  o.tsvd_threshold = tsvd_threshold;
  o.max_iterations = max_iterations;
  o.step_tolerance = step_tolerance;
  o.use_tsvd = true;
  return o;
}

KeyframerConfig EngineConfig::keyframer_config() const {
  KeyframerConfig k;
  k.reference_sensor = reference_sensor;
  k.second_sensor = second_sensor;
  k.translation_threshold = kf_translation;
  k.rotation_threshold = kf_rotation;
  k.default_cov = diagonal_covariance(sigma_t, sigma_r);
  k.adjoint_transport = adjoint_transport;
  return k;
}

EngineState::EngineState(const EngineConfig& config)
    : pq(config.pq_size, config.max_entropy), window(config.window_size, config.policy) {
  estimate.theta = config.initial_guess;
  estimate.entropy = std::numeric_limits<double>::infinity();
}

Engine::Engine(EngineConfig config)
    : config_((config.validate(), std::move(config))),
      solve_options_(config_.solve_options()),
      keyframer_(config_.keyframer_config()),
      state_(config_) {}

SegmentScore Engine::score_window(std::span<const MotionPair> pairs) const {
  try {
    const CalibrationEstimate est = solve(pairs, state_.estimate.theta, solve_options_);
    return {est.numerical_rank, est.entropy};
  } catch (const NumericalError&) {
    // Windows that cannot be solved are simply never admitted.
    return {0, std::numeric_limits<double>::infinity()};
  }
}

std::vector<ReportRow> Engine::step(const RelativePoseMeasurement& m) {
  std::vector<ReportRow> rows;
  state_.last_time = m.t;
  for (const MotionPair& pair : keyframer_.push(m)) process_pair(pair, m.t, rows);
  if (config_.decay_enabled) sweep(m.t, rows);
  state_.log.insert(state_.log.end(), rows.begin(), rows.end());
  return rows;
}

std::vector<ReportRow> Engine::finish() {
  std::vector<ReportRow> rows;
  for (const MotionPair& pair : keyframer_.flush()) process_pair(pair, state_.last_time, rows);
  state_.log.insert(state_.log.end(), rows.begin(), rows.end());
  return rows;
}

void Engine::process_pair(const MotionPair& pair, double now, std::vector<ReportRow>& rows) {
  ++state_.keyframes;
  const WindowEvent ev = state_.window.push_pair(
      pair, state_.pq, [this](std::span<const MotionPair> p) { return score_window(p); });
  if (ev.kind == WindowEvent::Kind::kAccumulating) return;

  const auto worst = state_.pq.worst_score();
  rows.push_back(make_entropy_row(now, ev.score->entropy,
                                  worst ? worst->entropy
                                        : std::numeric_limits<double>::quiet_NaN()));

  const Segment* offered = nullptr;
  if (ev.kind == WindowEvent::Kind::kSwapCandidate) {
    offered = &*ev.candidate;
  } else if (!state_.pq.full()) {
    offered = &*ev.current;
  }
  if (offered == nullptr) return;

  const SwapResult res = state_.pq.admit(*offered);
  if (!res.inserted) return;
  state_.window.consume(*offered);

  std::vector<ReportRow> solve_rows;
  full_solve(now, solve_rows);
  rows.push_back(make_swap_row(now, res.evicted_index ? static_cast<long>(*res.evicted_index) : -1,
                               offered->entropy, static_cast<long>(state_.solve_count)));
  rows.insert(rows.end(), solve_rows.begin(), solve_rows.end());
}

void Engine::full_solve(double now, std::vector<ReportRow>& rows) {
  const std::vector<MotionPair> pairs = state_.pq.all_pairs();
  state_.max_solve_pairs = std::max(state_.max_solve_pairs, pairs.size());
  const Pose previous = state_.estimate.theta;
  CalibrationEstimate est = solve(pairs, previous, solve_options_);
  ++state_.solve_count;

  if (twist_distance(previous, est.theta) < config_.min_update) {
    ++state_.consecutive_small_updates;
  } else {
    state_.consecutive_small_updates = 0;
  }
  state_.converged = state_.consecutive_small_updates >= config_.same_count;
  state_.estimate = std::move(est);

  rows.push_back(make_estimate_row(now, state_.estimate.theta, state_.estimate.entropy));
  rows.push_back(make_observability_row(now, state_.estimate.obs_scores,
                                        state_.estimate.numerical_rank));
}

void Engine::sweep(double now, std::vector<ReportRow>& rows) {
  const auto evicted = state_.pq.decay_sweep(now, config_.decay_lambda);
  if (evicted.empty()) return;
  for (const DecayEviction& e : evicted) {
    rows.push_back(make_decay_row(now, static_cast<long>(e.index), e.weight));
  }
  if (state_.pq.empty()) {
    // Keep the last estimate; nothing supports convergence any more.
    state_.consecutive_small_updates = 0;
    state_.converged = false;
    return;
  }
  full_solve(now, rows);
}

RunResult run(const EngineConfig& config, std::span<const RelativePoseMeasurement> stream) {
  Engine engine(config);
  for (const auto& m : stream) engine.step(m);
  engine.finish();
  return {engine.state(), engine.state().log};
}

}  // namespace selfcal
