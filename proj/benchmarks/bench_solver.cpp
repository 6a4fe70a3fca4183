#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "hmhf/bubbles.hpp"
#include "hmhf/flow_solver.hpp"

using namespace hmhf;

static void bm_step_equivariant(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const RadialField f =
      sample_radial(RadialGrid::uniform(1, h, 1.0), [](double r) { return 2 * std::atan(r); }, 0.0);
  FlowState s{0.0, f, 0.0, 0};
  for (auto _ : state) {
    s = step_equivariant(s, 1e-4);
    benchmark::DoNotOptimize(s.t);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_step_equivariant)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

static void bm_step_full2d(benchmark::State& state) {
  const double h = 2.0 / static_cast<double>(state.range(0));
  const BubbleMap b = make_equivariant_bubble(1, 0.5, {0, 0});
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 1.0, h), [&](const Point2& x) { return b(x); });
  FlowState s{0.0, f, 0.0, 0};
  const double dt = 0.2 * h * h;
  for (auto _ : state) {
    s = step_full2d(s, dt);
    benchmark::DoNotOptimize(s.t);
  }
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(bm_step_full2d)->RangeMultiplier(2)->Range(32, 256)->Complexity(benchmark::oN);

static void bm_run_flow_smooth(benchmark::State& state) {
  const RadialField f = sample_radial(
      RadialGrid::uniform(1, 0.01, 2.0),
      [](double r) { return 2 * std::atan(r) + 0.4 * std::sin(std::numbers::pi * r / 2) * r / 2; }, 0.0);
  FlowConfig c;
  c.t_final = 0.05;
  c.dt_max = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(run_flow(f, c).final_state.t);
}
BENCHMARK(bm_run_flow_smooth)->Unit(benchmark::kMillisecond);
