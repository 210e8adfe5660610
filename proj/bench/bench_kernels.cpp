// Serial reference vs OpenMP kernels on the two hot loops of a fit.
#include <benchmark/benchmark.h>

#include "spectrafit/fit.hpp"
#include "spectrafit/kernels.hpp"

using namespace spectrafit;

namespace {

struct Problem {
  Dataset ds;
  LiftSpec lift;
  LinearMap map;
};

Problem make_problem(int n, bool spectral) {
  const ShapeSpec shape = spectral ? ShapeSpec::l2_ball(3) : ShapeSpec::l1_ball(3);
  Dataset ds = synth(shape, n, NoiseSpec{0.1}, 7);
  const LiftSpec lift = spectral ? LiftSpec::spectraplex(3) : LiftSpec::simplex(6);
  FitConfig cfg;
  cfg.seed = 3;
  LinearMap map = initial_map(lift, ds, cfg);
  return {std::move(ds), lift, std::move(map)};
}

void run_assign(benchmark::State& state, kernels::Exec exec, bool spectral) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), spectral);
  kernels::Assignment asg;
  for (auto _ : state) {
    kernels::assign(p.lift, p.map, p.ds, asg, exec);
    benchmark::DoNotOptimize(asg.values.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void run_normal_equations(benchmark::State& state, kernels::Exec exec, bool spectral) {
  const Problem p = make_problem(static_cast<int>(state.range(0)), spectral);
  kernels::Assignment asg;
  kernels::assign(p.lift, p.map, p.ds, asg, kernels::Exec::Serial);
  for (auto _ : state) {
    auto ne = kernels::normal_equations(p.lift, p.ds, asg, exec);
    benchmark::DoNotOptimize(ne.gram.front().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void run_fit(benchmark::State& state, kernels::Exec exec) {
  const Dataset ds = synth(ShapeSpec::l1_ball(3), 400, NoiseSpec{0.1}, 11);
  FitConfig cfg;
  cfg.starts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_all(ds, LiftSpec::simplex(6), cfg, exec).best.objective);
}

}  // namespace

BENCHMARK_CAPTURE(run_assign, simplex_serial, kernels::Exec::Serial, false)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_assign, simplex_parallel, kernels::Exec::Parallel, false)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_assign, spectraplex_serial, kernels::Exec::Serial, true)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_assign, spectraplex_parallel, kernels::Exec::Parallel, true)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_normal_equations, simplex_serial, kernels::Exec::Serial, false)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_normal_equations, simplex_parallel, kernels::Exec::Parallel, false)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_normal_equations, spectraplex_serial, kernels::Exec::Serial, true)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_normal_equations, spectraplex_parallel, kernels::Exec::Parallel, true)->Range(1 << 10, 1 << 16);
BENCHMARK_CAPTURE(run_fit, multistart_serial, kernels::Exec::Serial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(run_fit, multistart_parallel, kernels::Exec::Parallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
