#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "selfcal/queue.hpp"

using namespace selfcal;

namespace {

// The worked examples use entropies in the 20s, so the gate is raised above them.
constexpr double kHighGate = 100.0;

MotionPair pair_at(double t_end) {
  MotionPair p;
  p.t_start = t_end - 1.0;
  p.t_end = t_end;
  return p;
}

WindowSnapshot snapshot(double entropy, int rank = 6, double t = 0.0) {
  return {{pair_at(t + 1.0)}, {rank, entropy}};
}

CandidateHistory history_of(double a, double b, double c) {
  CandidateHistory h;
  h.push(snapshot(a, 6, 1));
  h.push(snapshot(b, 6, 2));
  h.push(snapshot(c, 6, 3));
  return h;
}

Segment segment(double entropy, int rank = 6, double created_at = 0.0) {
  Segment s;
  s.pairs = {pair_at(created_at)};
  s.entropy = entropy;
  s.rank = rank;
  s.created_at = created_at;
  return s;
}

InformativeQueue full_queue(std::initializer_list<double> entropies, double gate = kHighGate) {
  InformativeQueue q(entropies.size(), gate);
  double t = 0.0;
  for (double h : entropies) EXPECT_TRUE(q.admit(segment(h, 6, t += 1.0)).inserted);
  return q;
}

}  // namespace

TEST(ShouldSwap, DecreasingHistoryWaits) {
  EXPECT_FALSE(should_swap(history_of(28, 27, 26), SegmentScore{6, 30}, kHighGate));
}

TEST(ShouldSwap, LocalMinimumBeatingQueueIsSwapped) {
  const auto s = should_swap(history_of(26, 24, 25), SegmentScore{6, 30}, kHighGate);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->entropy, 24);
  EXPECT_EQ(s->created_at, 3.0);
}

TEST(ShouldSwap, LocalMinimumNotBeatingQueueWaits) {
  EXPECT_FALSE(should_swap(history_of(26, 24, 25), SegmentScore{6, 23}, kHighGate));
}

TEST(ShouldSwap, TiesDoNotSwap) {
  EXPECT_FALSE(should_swap(history_of(24, 24, 25), SegmentScore{6, 30}, kHighGate));
  EXPECT_FALSE(should_swap(history_of(26, 24, 24), SegmentScore{6, 30}, kHighGate));
  EXPECT_FALSE(should_swap(history_of(26, 24, 25), SegmentScore{6, 24}, kHighGate));
  EXPECT_FALSE(should_swap(history_of(26, 24, 25), SegmentScore{6, 30}, 24.0));
}

TEST(ShouldSwap, MaximumEntropyGate) {
  EXPECT_FALSE(should_swap(history_of(26, 24, 25), SegmentScore{6, 30}, 15.0));
  EXPECT_TRUE(should_swap(history_of(12, 10, 11), SegmentScore{6, 14}, 15.0));
}

TEST(ShouldSwap, NeedsThreeEvaluations) {
  CandidateHistory h;
  h.push(snapshot(30));
  h.push(snapshot(20));
  EXPECT_FALSE(should_swap(h, std::nullopt, kHighGate));
}

TEST(ShouldSwap, RankDominatesEntropy) {
  CandidateHistory h;
  h.push(snapshot(10, 5));
  h.push(snapshot(40, 6));
  h.push(snapshot(12, 5));
  // Higher rank beats lower-rank neighbours and a lower-rank queue entry.
  const auto s = should_swap(h, SegmentScore{5, 1}, kHighGate);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->rank, 6);
}

TEST(ShouldSwap, MonotoneHistoriesNeverSwap) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    double v[3] = {u(rng), u(rng), u(rng)};
    std::sort(v, v + 3);
    if (i % 2) std::swap(v[0], v[2]);
    EXPECT_FALSE(should_swap(history_of(v[0], v[1], v[2]), SegmentScore{6, 1e9}, 1e9));
  }
}

TEST(Admit, NonFullQueueInsertsWithoutEviction) {
  InformativeQueue q(10, kHighGate);
  for (double h : {20.0, 21.0, 22.0}) (void)q.admit(segment(h));
  const SwapResult r = q.admit(segment(25));
  EXPECT_TRUE(r.inserted);
  EXPECT_FALSE(r.evicted_index.has_value());
  EXPECT_EQ(q.size(), 4u);
}

TEST(Admit, FullQueueEvictsWorst) {
  InformativeQueue q = full_queue({22, 30, 25});
  const SwapResult r = q.admit(segment(24));
  ASSERT_TRUE(r.inserted);
  ASSERT_TRUE(r.evicted_index.has_value());
  EXPECT_EQ(*r.evicted_index, 1u);
  EXPECT_EQ(r.evicted->entropy, 30);
  EXPECT_EQ(q.segments()[1].entropy, 24);
}

TEST(Admit, LowerRankIsRejectedByFullRankQueue) {
  InformativeQueue q = full_queue({30, 40, 50});
  EXPECT_FALSE(q.admit(segment(1, 5)).inserted);
}

TEST(Admit, EntropyGateAppliesToNonFullQueue) {
  InformativeQueue q(10, 15.0);
  EXPECT_FALSE(q.admit(segment(15.0)).inserted);
  EXPECT_FALSE(q.admit(segment(std::nan(""))).inserted);
  EXPECT_FALSE(q.admit(segment(3.0, 0)).inserted);
  EXPECT_TRUE(q.admit(segment(14.9)).inserted);
}

TEST(Admit, EqualEntropyEvictsOlder) {
  InformativeQueue q(3, kHighGate);
  (void)q.admit(segment(30, 6, 5.0));
  (void)q.admit(segment(30, 6, 2.0));
  (void)q.admit(segment(10, 6, 1.0));
  EXPECT_EQ(*q.worst_index(), 1u);
}

TEST(Admit, SizeBoundAndMonotoneWorst) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20.0, 14.0);
  std::uniform_int_distribution<int> rank(4, 6);
  InformativeQueue q(10, 15.0);
  std::optional<SegmentScore> worst;
  for (int i = 0; i < 2000; ++i) {
    const SwapResult r = q.admit(segment(u(rng), rank(rng), i));
    EXPECT_LE(q.size(), 10u);
    if (q.full() && worst && r.inserted) {
      EXPECT_FALSE(better(*worst, *q.worst_score()));
    }
    if (q.full()) worst = q.worst_score();
  }
}

TEST(Decay, WeightExamples) {
  EXPECT_DOUBLE_EQ(decay_weight(0.04, 0.0), 0.04);
  EXPECT_NEAR(decay_weight(0.04, 50.0), 0.04 * std::exp(-2.0), 1e-15);
  EXPECT_NEAR(decay_weight(0.04, 50.0), 0.00541, 1e-5);
  EXPECT_NEAR(decay_weight(0.04, std::log(40.0) / 0.04), 0.001, 1e-15);
}

TEST(Decay, SweepEvictsPastTheFloor) {
  InformativeQueue q(5, kHighGate);
  (void)q.admit(segment(1, 6, 0.0));
  (void)q.admit(segment(2, 6, 50.0));
  (void)q.admit(segment(3, 6, 100.0));
  EXPECT_TRUE(q.decay_sweep(92.2, 0.04).empty());
  const auto out = q.decay_sweep(92.23, 0.04);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].index, 0u);
  EXPECT_LT(out[0].weight, 0.001);
  EXPECT_EQ(q.size(), 2u);
  EXPECT_TRUE(q.decay_sweep(92.23, 0.04).empty());  // idempotent
  EXPECT_THROW((void)q.decay_sweep(1.0, 0.0), std::invalid_argument);
}

TEST(Window, AccumulatesUntilFull) {
  CandidateWindow w(10, SwapPolicy::kLocalMinimum);
  InformativeQueue q(10, kHighGate);
  int calls = 0;
  const WindowScorer scorer = [&](std::span<const MotionPair> p) {
    ++calls;
    EXPECT_EQ(p.size(), 10u);
    return SegmentScore{6, 1.0};
  };
  for (int i = 1; i <= 9; ++i) {
    EXPECT_EQ(w.push_pair(pair_at(i), q, scorer).kind, WindowEvent::Kind::kAccumulating);
  }
  EXPECT_EQ(calls, 0);
  const WindowEvent ev = w.push_pair(pair_at(10), q, scorer);
  EXPECT_EQ(ev.kind, WindowEvent::Kind::kEvaluated);
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(ev.current->created_at, 10.0);
}

TEST(Window, LocalMinimumEmitsMiddleSnapshot) {
  CandidateWindow w(10, SwapPolicy::kLocalMinimum);
  InformativeQueue q = full_queue({30, 20});
  const double script[] = {28, 26, 24, 25};
  int k = 0;
  const WindowScorer scorer = [&](std::span<const MotionPair>) {
    return SegmentScore{6, script[k++]};
  };
  for (int i = 1; i <= 9; ++i) (void)w.push_pair(pair_at(i), q, scorer);
  EXPECT_EQ(w.push_pair(pair_at(10), q, scorer).kind, WindowEvent::Kind::kEvaluated);
  EXPECT_EQ(w.push_pair(pair_at(11), q, scorer).kind, WindowEvent::Kind::kEvaluated);
  EXPECT_EQ(w.push_pair(pair_at(12), q, scorer).kind, WindowEvent::Kind::kEvaluated);
  const WindowEvent ev = w.push_pair(pair_at(13), q, scorer);
  ASSERT_EQ(ev.kind, WindowEvent::Kind::kSwapCandidate);
  EXPECT_EQ(ev.candidate->entropy, 24);
  EXPECT_EQ(ev.candidate->created_at, 12.0);
  EXPECT_EQ(ev.candidate->pairs.front().t_end, 3.0);
}

TEST(Window, NaiveSwapsAsSoonAsWorstIsBeaten) {
  CandidateWindow w(3, SwapPolicy::kNaive);
  InformativeQueue q = full_queue({30, 20});
  const WindowScorer scorer = [](std::span<const MotionPair>) { return SegmentScore{6, 27}; };
  for (int i = 1; i <= 2; ++i) (void)w.push_pair(pair_at(i), q, scorer);
  EXPECT_EQ(w.push_pair(pair_at(3), q, scorer).kind, WindowEvent::Kind::kSwapCandidate);
}

TEST(Window, NoCandidatesAgainstNonFullQueue) {
  CandidateWindow w(1, SwapPolicy::kNaive);
  InformativeQueue q(3, kHighGate);
  const WindowScorer scorer = [](std::span<const MotionPair>) { return SegmentScore{6, 1}; };
  EXPECT_EQ(w.push_pair(pair_at(1), q, scorer).kind, WindowEvent::Kind::kEvaluated);
}

TEST(Window, ConsumeDropsAdmittedPairsAndHistory) {
  CandidateWindow w(4, SwapPolicy::kLocalMinimum);
  InformativeQueue q(3, kHighGate);
  const WindowScorer scorer = [](std::span<const MotionPair>) { return SegmentScore{6, 1}; };
  WindowEvent ev;
  for (int i = 1; i <= 5; ++i) ev = w.push_pair(pair_at(i), q, scorer);
  EXPECT_EQ(w.history().size(), 2u);
  w.consume(*ev.current);
  EXPECT_EQ(w.size(), 0u);
  EXPECT_EQ(w.history().size(), 0u);
}
