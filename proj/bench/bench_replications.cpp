#include <benchmark/benchmark.h>

#include "dftrl/barrier.hpp"
#include "dftrl/config.hpp"
#include "dftrl/experiment.hpp"
#include "dftrl/linear_bandit.hpp"

using namespace dftrl;

namespace {

ExperimentConfig semi_config(int replications) {
  return parse_config({{"setting", "semi_bandit"},
                       {"horizon", 2000},
                       {"replications", replications},
                       {"seed", 1},
                       {"delay", {{"type", "constant"}, {"d", 5}}},
                       {"tuning", {{"mode", "auto"}}},
                       {"domain", {{"type", "m_sets"}, {"dim", 5}, {"budget", 2}}},
                       {"environment",
                        {{"type", "fixed_gap"}, {"base", {0.5, 0.5, 0.5, 0.5, 0.5}}, {"gap", 0.2}, {"best", {1, 3}}}}});
}

void BM_ReplicationsSerial(benchmark::State& state) {
  const ExperimentConfig cfg = semi_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment_serial(cfg));
}

void BM_ReplicationsParallel(benchmark::State& state) {
  const ExperimentConfig cfg = semi_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}

struct MomentsFixture {
  Regularizer reg{QuadraticPlusBarrier{1.0 / 256.0, 1.0 / 65536.0, BarrierSpec(BallBarrier{4, 1.0})}};
  Eigen::Vector4d w{0.3, -0.2, 0.1, 0.4};
  Eigen::Vector4d loss{0.5, -0.4, 0.3, 0.2};
};

void BM_EstimatorMomentsSerial(benchmark::State& state) {
  const MomentsFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(estimator_moments_serial(f.loss, f.w, f.reg, state.range(0), 3));
}

void BM_EstimatorMomentsParallel(benchmark::State& state) {
  const MomentsFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(estimator_moments_parallel(f.loss, f.w, f.reg, state.range(0), 3));
}

}  // namespace

BENCHMARK(BM_ReplicationsSerial)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsParallel)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimatorMomentsSerial)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimatorMomentsParallel)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
