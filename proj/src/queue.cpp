#include "selfcal/queue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace selfcal {

bool SegmentScore::valid() const { return rank > 0 && std::isfinite(entropy); }

bool better(const SegmentScore& a, const SegmentScore& b) {
  if (a.rank != b.rank) return a.rank > b.rank;
  return a.entropy < b.entropy;
}

double decay_weight(double lambda, double age) { return lambda * std::exp(-lambda * age); }

Segment WindowSnapshot::to_segment() const {
  Segment s;
  s.pairs = pairs;
  s.entropy = score.entropy;
  s.rank = score.rank;
  s.created_at = pairs.empty() ? 0.0 : pairs.back().t_end;
  return s;
}

void CandidateHistory::push(WindowSnapshot snapshot) {
  entries_.push_back(std::move(snapshot));
  while (entries_.size() > kDepth) entries_.pop_front();
}

std::optional<Segment> should_swap(const CandidateHistory& history,
                                   std::optional<SegmentScore> worst, double max_entropy) {
  if (history.size() < CandidateHistory::kDepth) return std::nullopt;
  const SegmentScore prev = history[0].score;
  const SegmentScore mid = history[1].score;
  const SegmentScore cur = history[2].score;
  if (!mid.valid()) return std::nullopt;
  if (!(better(mid, prev) && better(mid, cur))) return std::nullopt;
  if (worst && !better(mid, *worst)) return std::nullopt;
  if (!(mid.entropy < max_entropy)) return std::nullopt;
  return history[1].to_segment();
}

// ---------------------------------------------------------------------------

InformativeQueue::InformativeQueue(std::size_t capacity, double max_entropy)
    : capacity_(capacity), max_entropy_(max_entropy) {
  if (capacity_ == 0) throw std::invalid_argument("queue capacity must be positive");
  segments_.reserve(capacity_);
}

std::optional<std::size_t> InformativeQueue::worst_index() const {
  if (segments_.empty()) return std::nullopt;
  std::size_t worst = 0;
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    const Segment& w = segments_[worst];
    if (better(w.score(), s.score())) {
      worst = i;
    } else if (s.rank == w.rank && s.entropy == w.entropy && s.created_at < w.created_at) {
      worst = i;
    }
  }
  return worst;
}

std::optional<SegmentScore> InformativeQueue::worst_score() const {
  const auto w = worst_index();
  if (!w) return std::nullopt;
  return segments_[*w].score();
}

SwapResult InformativeQueue::admit(Segment segment) {
  SwapResult result;
  if (!segment.score().valid() || !(segment.entropy < max_entropy_)) return result;
  if (!full()) {
    segments_.push_back(std::move(segment));
    result.inserted = true;
    return result;
  }
  const std::size_t w = *worst_index();
  if (!better(segment.score(), segments_[w].score())) return result;
  result.inserted = true;
  result.evicted_index = w;
  result.evicted = std::exchange(segments_[w], std::move(segment));
  return result;
}

std::vector<DecayEviction> InformativeQueue::decay_sweep(double now, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("decay rate must be positive");
  std::vector<DecayEviction> evicted;
  std::vector<Segment> kept;
  kept.reserve(capacity_);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const double w = decay_weight(lambda, now - segments_[i].created_at);
    if (w < kDecayFloor) {
      evicted.push_back({i, w, std::move(segments_[i])});
    } else {
      kept.push_back(std::move(segments_[i]));
    }
  }
  segments_ = std::move(kept);
  return evicted;
}

std::vector<MotionPair> InformativeQueue::all_pairs() const {
  std::vector<MotionPair> out;
  for (const Segment& s : segments_) out.insert(out.end(), s.pairs.begin(), s.pairs.end());
  return out;
}

double InformativeQueue::total_entropy() const {
  double sum = 0.0;
  for (const Segment& s : segments_) sum += s.entropy;
  return sum;
}

// ---------------------------------------------------------------------------

CandidateWindow::CandidateWindow(std::size_t capacity, SwapPolicy policy)
    : capacity_(capacity), policy_(policy) {
  if (capacity_ == 0) throw std::invalid_argument("window capacity must be positive");
}

WindowEvent CandidateWindow::push_pair(const MotionPair& pair, const InformativeQueue& pq,
                                       const WindowScorer& scorer) {
  window_.push_back(pair);
  while (window_.size() > capacity_) window_.pop_front();

  WindowEvent ev;
  if (window_.size() < capacity_) return ev;

  WindowSnapshot snap{{window_.begin(), window_.end()}, {}};
  snap.score = scorer(snap.pairs);
  ++evaluations_;
  ev.kind = WindowEvent::Kind::kEvaluated;
  ev.score = snap.score;
  ev.current = snap.to_segment();
  history_.push(std::move(snap));

  if (!pq.full()) return ev;

  std::optional<Segment> candidate;
  if (policy_ == SwapPolicy::kNaive) {
    const SegmentScore s = *ev.score;
    const auto worst = pq.worst_score();
    if (s.valid() && (!worst || better(s, *worst)) && s.entropy < pq.max_entropy()) {
      candidate = ev.current;
    }
  } else {
    candidate = should_swap(history_, pq.worst_score(), pq.max_entropy());
  }
  if (candidate) {
    ev.kind = WindowEvent::Kind::kSwapCandidate;
    ev.candidate = std::move(candidate);
  }
  return ev;
}

void CandidateWindow::consume(const Segment& admitted) {
  const double last = admitted.created_at;
  while (!window_.empty() && window_.front().t_end <= last) window_.pop_front();
  history_.clear();
}

}  // namespace selfcal
