#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "selfcal/covariance.hpp"
#include "selfcal/estimator.hpp"
#include "selfcal/geometry.hpp"
#include "selfcal/io.hpp"
#include "selfcal/keyframer.hpp"
#include "selfcal/queue.hpp"

namespace selfcal {

/// Tuning parameters. Defaults are the reference values of the method.
struct EngineConfig {
  double tsvd_threshold = 0.1;   // relative singular-value cut
  double max_entropy = 15.0;     // admission gate, nats
  std::size_t pq_size = 10;      // segments in the informative queue
  std::size_t window_size = 10;  // pairs per candidate window
  double kf_translation = 0.15;  // m
  double kf_rotation = 0.1745;   // rad
  double decay_lambda = 0.04;    // 1/s of stream time
  int same_count = 3;            // consecutive small updates for convergence
  double min_update = 0.008;     // se(3) norm of a "small" update

  Pose initial_guess;
  std::string reference_sensor = "front";
  std::string second_sensor = "back";
  double sigma_t = kDefaultSigmaTranslation;
  double sigma_r = kDefaultSigmaRotation;

  SwapPolicy policy = SwapPolicy::kLocalMinimum;
  bool decay_enabled = true;
  bool adjoint_transport = false;
  int max_iterations = 20;
  double step_tolerance = 1e-10;

  /// Throws ConfigError.
  void validate() const;
  [[nodiscard]] SolveOptions solve_options() const;
  [[nodiscard]] KeyframerConfig keyframer_config() const;
};

struct EngineState {
  EngineState(const EngineConfig& config);

  CalibrationEstimate estimate;
  InformativeQueue pq;
  CandidateWindow window;
  int consecutive_small_updates = 0;
  bool converged = false;
  std::size_t solve_count = 0;      // full-queue solves
  std::size_t max_solve_pairs = 0;  // largest full-queue solve input
  std::size_t keyframes = 0;
  double last_time = 0.0;
  std::vector<ReportRow> log;
};

/// Online calibration driver: keyframing, candidate scoring, queue swaps,
/// full-queue solves, decay and convergence tracking.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  /// Feeds one measurement and returns the report rows it produced.
  std::vector<ReportRow> step(const RelativePoseMeasurement& m);

  /// Flushes the keyframer at end of stream.
  std::vector<ReportRow> finish();

  [[nodiscard]] const EngineState& state() const { return state_; }
  [[nodiscard]] const EngineConfig& config() const { return config_; }

 private:
  void process_pair(const MotionPair& pair, double now, std::vector<ReportRow>& rows);
  void full_solve(double now, std::vector<ReportRow>& rows);
  void sweep(double now, std::vector<ReportRow>& rows);
  SegmentScore score_window(std::span<const MotionPair> pairs) const;

  EngineConfig config_;
  SolveOptions solve_options_;
  Keyframer keyframer_;
  EngineState state_;
};

struct RunResult {
  EngineState state;
  std::vector<ReportRow> report;
};

/// Folds Engine::step over the stream and flushes.
[[nodiscard]] RunResult run(const EngineConfig& config,
                            std::span<const RelativePoseMeasurement> stream);

}  // namespace selfcal
