#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "selfcal/keyframer.hpp"

namespace selfcal {

/// Ranking key of a segment. Higher numerical rank always wins because
/// entropies over subspaces of different dimension are not comparable; equal
/// ranks compare by entropy, lower is better.
struct SegmentScore {
  int rank = 0;
  double entropy = 0.0;

  /// Scorable segments have rank > 0 and finite entropy.
  [[nodiscard]] bool valid() const;
};

/// Strictly better: higher rank, or equal rank and strictly lower entropy.
[[nodiscard]] bool better(const SegmentScore& a, const SegmentScore& b);

struct Segment {
  std::vector<MotionPair> pairs;
  double entropy = 0.0;
  int rank = 0;
  double created_at = 0.0;  // t_end of the last pair

  [[nodiscard]] SegmentScore score() const { return {rank, entropy}; }
};

/// One evaluated candidate window.
struct WindowSnapshot {
  std::vector<MotionPair> pairs;
  SegmentScore score;

  [[nodiscard]] Segment to_segment() const;
};

/// The last three candidate-window evaluations, oldest first.
class CandidateHistory {
 public:
  static constexpr std::size_t kDepth = 3;

  void push(WindowSnapshot snapshot);
  void clear() { entries_.clear(); }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const WindowSnapshot& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::deque<WindowSnapshot> entries_;
};

/// Returns the middle snapshot iff it is a strict local optimum of the
/// history (better than both neighbours), strictly beats `worst` (when the
/// queue has one) and its entropy is below `max_entropy`.
[[nodiscard]] std::optional<Segment> should_swap(const CandidateHistory& history,
                                                 std::optional<SegmentScore> worst,
                                                 double max_entropy);

struct SwapResult {
  bool inserted = false;
  std::optional<std::size_t> evicted_index;
  std::optional<Segment> evicted;
};

struct DecayEviction {
  std::size_t index;  // position in the queue before the sweep
  double weight;
  Segment segment;
};

/// Bounded set of informative segments over which the extrinsic is solved.
class InformativeQueue {
 public:
  InformativeQueue(std::size_t capacity, double max_entropy);

  [[nodiscard]] std::size_t size() const { return segments_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool empty() const { return segments_.empty(); }
  [[nodiscard]] bool full() const { return segments_.size() >= capacity_; }
  [[nodiscard]] double max_entropy() const { return max_entropy_; }
  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }

  /// Entry evicted next: lowest rank, then highest entropy, then oldest.
  [[nodiscard]] std::optional<std::size_t> worst_index() const;
  [[nodiscard]] std::optional<SegmentScore> worst_score() const;

  /// Inserts into a non-full queue, or replaces the worst entry of a full one
  /// when `segment` is strictly better. Invalid segments and those with
  /// entropy >= max_entropy are rejected.
  SwapResult admit(Segment segment);

  /// Removes segments whose weight lambda * exp(-lambda * age) fell below
  /// kDecayFloor.
  std::vector<DecayEviction> decay_sweep(double now, double lambda);

  [[nodiscard]] std::vector<MotionPair> all_pairs() const;
  [[nodiscard]] double total_entropy() const;

  static constexpr double kDecayFloor = 0.001;

 private:
  std::size_t capacity_;
  double max_entropy_;
  std::vector<Segment> segments_;
};

/// lambda * exp(-lambda * age).
[[nodiscard]] double decay_weight(double lambda, double age);

enum class SwapPolicy {
  kLocalMinimum,  // wait for a local entropy minimum of the rolling window
  kNaive,         // swap as soon as the window beats the worst entry
};

/// Scores a window of pairs; normally a solve over the window.
using WindowScorer = std::function<SegmentScore(std::span<const MotionPair>)>;

struct WindowEvent {
  enum class Kind { kAccumulating, kEvaluated, kSwapCandidate };
  Kind kind = Kind::kAccumulating;
  std::optional<SegmentScore> score;  // set once the window was evaluated
  std::optional<Segment> current;     // the window just evaluated
  std::optional<Segment> candidate;   // set for kSwapCandidate
};

/// Rolling window over the most recent pairs (stride 1).
class CandidateWindow {
 public:
  CandidateWindow(std::size_t capacity, SwapPolicy policy);

  /// Appends `pair`; once the window is full it is scored and the history
  /// updated. Swap candidates are only proposed against a full queue; filling
  /// a non-full queue is the caller's decision.
  WindowEvent push_pair(const MotionPair& pair, const InformativeQueue& pq,
                        const WindowScorer& scorer);

  /// Drops every pair already contained in an admitted segment and clears the
  /// history, so no pair ever lands in two segments.
  void consume(const Segment& admitted);

  [[nodiscard]] std::size_t size() const { return window_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t evaluations() const { return evaluations_; }
  [[nodiscard]] const CandidateHistory& history() const { return history_; }
  [[nodiscard]] SwapPolicy policy() const { return policy_; }

 private:
  std::size_t capacity_;
  SwapPolicy policy_;
  std::deque<MotionPair> window_;
  CandidateHistory history_;
  std::size_t evaluations_ = 0;
};

}  // namespace selfcal
