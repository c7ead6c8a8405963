#include <benchmark/benchmark.h>

#include <vector>

#include "selfcal/linearize.hpp"
#include "selfcal/simulator.hpp"

namespace {

std::vector<selfcal::MotionPair> make_pairs(std::size_t n) {
  selfcal::ScenarioSpec spec;
  spec.noise = {0.005, 0.0087};
  spec.seed = 3;
  spec.theta_true = selfcal::Pose::from_axis_angle(selfcal::Vector3(0.3, -0.2, 1.0), 0.4,
                                                   selfcal::Vector3(0.2, -0.1, 0.05));
  std::vector<selfcal::MotionPair> pairs;
  while (pairs.size() < n) {
    spec.duration += 60.0;
    pairs = selfcal::keyframe_all(selfcal::generate(spec), {});
  }
  pairs.resize(n);
  return pairs;
}

const selfcal::Pose kTheta = selfcal::Pose::from_axis_angle(
    selfcal::Vector3(0.2, -0.2, 1.0), 0.35, selfcal::Vector3(0.25, -0.05, 0.0));

void BM_LinearizeSerial(benchmark::State& state) {
  const auto pairs = make_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(selfcal::linearize_serial(pairs, kTheta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LinearizeParallel(benchmark::State& state) {
  const auto pairs = make_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(selfcal::linearize(pairs, kTheta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CostSerial(benchmark::State& state) {
  const auto pairs = make_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(selfcal::whitened_cost_serial(pairs, kTheta));
}

void BM_CostParallel(benchmark::State& state) {
  const auto pairs = make_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(selfcal::whitened_cost(pairs, kTheta));
}

}  // namespace

BENCHMARK(BM_LinearizeSerial)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK(BM_LinearizeParallel)->Arg(10)->Arg(100)->Arg(1000);
BENCHMARK(BM_CostSerial)->Arg(100)->Arg(1000);
BENCHMARK(BM_CostParallel)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
