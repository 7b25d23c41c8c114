#include <benchmark/benchmark.h>

#include <vector>

#include "changeprop/belief.hpp"
#include "changeprop/change_model.hpp"
#include "changeprop/detectors.hpp"
#include "changeprop/dp.hpp"
#include "changeprop/experiments.hpp"
#include "changeprop/obs_model.hpp"
#include "changeprop/rng.hpp"

namespace cp = changeprop;

namespace {

cp::ChangeModel model_with(int sensors) {
  std::vector<double> rho(static_cast<std::size_t>(sensors), 0.3);
  rho.front() = 0.01;
  return cp::ChangeModel::validate(sensors, rho);
}

void BM_BeliefAdvance(benchmark::State& st) {
  const int L = static_cast<int>(st.range(0));
  const cp::BeliefEngine engine(model_with(L));
  cp::Stream rng = cp::Stream::derive(1, 0);
  std::vector<double> llr(static_cast<std::size_t>(L));
  for (auto& x : llr) x = rng.standard_normal() - 0.5;
  auto state = engine.initial();
  for (auto _ : st) {
    engine.advance(state, llr);
    benchmark::DoNotOptimize(state.log_q.data());
    if (state.k > 10000) state = engine.initial();
  }
}
BENCHMARK(BM_BeliefAdvance)->Arg(1)->Arg(2)->Arg(5)->Arg(10);

void BM_RunDetector(benchmark::State& st) {
  const auto kind = static_cast<cp::DetectorKind>(st.range(0));
  const auto m = model_with(3);
  const cp::GaussianShiftModel obs(1.0);
  const cp::DetectorSpec spec{kind, cp::threshold_for_alpha(m.disruption_rate(), 1e-3)};
  const std::int64_t k_max = cp::default_k_max(m, obs, spec.A);
  std::uint64_t i = 0;
  for (auto _ : st) {
    cp::Stream rng = cp::Stream::derive(2, i++);
    benchmark::DoNotOptimize(cp::run_detector(spec, m, obs, rng, k_max));
  }
}
BENCHMARK(BM_RunDetector)
    ->Arg(static_cast<int>(cp::DetectorKind::NuA))
    ->Arg(static_cast<int>(cp::DetectorKind::SingleSensor))
    ->Arg(static_cast<int>(cp::DetectorKind::Mismatched));

void BM_EstimatePerformance(benchmark::State& st) {
  const auto m = model_with(2);
  const cp::GaussianShiftModel obs(1.0);
  const cp::DetectorSpec spec{cp::DetectorKind::NuA, cp::threshold_for_alpha(m.disruption_rate(), 1e-2)};
  for (auto _ : st)
    benchmark::DoNotOptimize(cp::estimate_performance(spec, m, obs, 1000, 3));
}
BENCHMARK(BM_EstimatePerformance)->Unit(benchmark::kMillisecond);

void BM_ValueIterate(benchmark::State& st) {
  const auto m = model_with(2);
  const cp::GaussianShiftModel obs(1.0);
  const auto grid = cp::SimplexGrid::make(2, 1.0 / static_cast<double>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(cp::value_iterate(m, obs, 0.05, grid, 100));
}
BENCHMARK(BM_ValueIterate)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
