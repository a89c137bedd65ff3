#include <benchmark/benchmark.h>

#include "love/returns.hpp"
#include "love/rng.hpp"

namespace {

love::ImaginedTrajectory<double> make_traj(int horizon) {
  love::Rng rng(1);
  love::ImaginedTrajectory<double> t;
  t.rewards.resize(std::size_t(horizon) + 1);
  t.values.resize(std::size_t(horizon) + 1);
  for (auto& r : t.rewards) r = rng.uniform(-1, 1);
  for (auto& v : t.values) v = rng.uniform(-1, 1);
  return t;
}

void BM_LambdaReturn(benchmark::State& state) {
  auto traj = make_traj(int(state.range(0)));
  for (auto _ : state) {
    auto out = love::lambda_return(traj);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_LambdaReturn)->Arg(15)->Arg(50);

void BM_EnsembleStats(benchmark::State& state) {
  love::Rng rng(2);
  std::vector<double> returns(std::size_t(state.range(0)));
  for (auto& g : returns) g = rng.normal();
  for (auto _ : state) {
    auto stats = love::ensemble_stats(returns);
    benchmark::DoNotOptimize(stats.mean);
  }
}
BENCHMARK(BM_EnsembleStats)->Arg(5)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
