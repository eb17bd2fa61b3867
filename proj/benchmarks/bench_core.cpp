#include <benchmark/benchmark.h>

#include "devices.hpp"
#include "sdid/analytic.hpp"
#include "sdid/model.hpp"
#include "sdid/operators.hpp"
#include "sdid/rb.hpp"
#include "sdid/trajectory.hpp"

using namespace sdid;
using namespace sdid::testing;

static void BM_ExpmLiouvillian(benchmark::State& state) {
  const DeviceModel d = three_spectator_device();
  const Superoperator l = model::build_liouvillian(d).superop * 1e-5;
  for (auto _ : state) benchmark::DoNotOptimize(ops::expm(l));
}
BENCHMARK(BM_ExpmLiouvillian)->Unit(benchmark::kMillisecond);

static void BM_PropagateRamsey(benchmark::State& state) {
  const DeviceModel d = three_spectator_device();
  const auto bundle = model::build_liouvillian(d);
  const auto rho0 = model::initial_state(d, SpectatorInit::parse("111"));
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(k * 5e-6);
  for (auto _ : state) benchmark::DoNotOptimize(model::propagate(bundle, rho0, times));
}
BENCHMARK(BM_PropagateRamsey)->Unit(benchmark::kMillisecond);

static void BM_AnalyticCoherence(benchmark::State& state) {
  const DeviceModel d = three_spectator_device();
  const SpectatorInit init = SpectatorInit::parse("111");
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analytic::coherence_nspec(d, init, t));
    t += 1e-9;
  }
}
BENCHMARK(BM_AnalyticCoherence);

static void BM_TrajectoryEnsemble(benchmark::State& state) {
  const DeviceModel d = three_spectator_device();
  const SpectatorInit init = SpectatorInit::parse("111");
  const auto seq = trajectory::build_cpmg(200e-6, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(trajectory::ensemble_coherence(d, init, seq, EnsembleSpec{10000, 1}));
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_TrajectoryEnsemble)->Arg(0)->Arg(16)->Arg(160)->Unit(benchmark::kMillisecond);

static void BM_SimulateRb(benchmark::State& state) {
  const DeviceModel d = three_spectator_device();
  RbOptions opt;
  opt.n_seq = 5;
  opt.n_shots = 10;
  for (auto _ : state) benchmark::DoNotOptimize(rb::simulate_rb(d, SpectatorPrep::kPlus, opt));
}
BENCHMARK(BM_SimulateRb)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
