#include <benchmark/benchmark.h>

#include "hmhf/bubbles.hpp"
#include "hmhf/sphere_field.hpp"

using namespace hmhf;

static void bm_dirichlet_energy_cartesian(benchmark::State& state) {
  const double h = 2.0 / static_cast<double>(state.range(0));
  const BubbleMap b = make_equivariant_bubble(1, 0.3, {0.1, 0});
  const SphereField f = sample_field(Grid2D::centered({0, 0}, 1.0, h), [&](const Point2& x) { return b(x); });
  for (auto _ : state) benchmark::DoNotOptimize(dirichlet_energy(f, Disc{{0.1, 0}, 0.8}).value);
  state.SetComplexityN(state.range(0) * state.range(0));
}
BENCHMARK(bm_dirichlet_energy_cartesian)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oN);

static void bm_cell_table_disc(benchmark::State& state) {
  const BubbleMap b = make_equivariant_bubble(1, 0.3, {0, 0});
  const CartesianField f = sample_field(Grid2D::centered({0, 0}, 1.0, 0.01), [&](const Point2& x) { return b(x); });
  const CellEnergyTable table(f.grid, cell_energies(f.grid, f.values));
  for (auto _ : state) benchmark::DoNotOptimize(table.disc({{0, 0}, 0.5}));
}
BENCHMARK(bm_cell_table_disc);

static void bm_bubble_disc_energy(benchmark::State& state) {
  const BubbleMap b = make_equivariant_bubble(2, 0.5, {0, 0});
  for (auto _ : state) benchmark::DoNotOptimize(bubble_disc_energy(b.map(), {{0.2, 0}, 3.0}));
}
BENCHMARK(bm_bubble_disc_energy);

static void bm_compute_scale(benchmark::State& state) {
  const BubbleMap b = make_equivariant_bubble(1, 0.5, {1, 1});
  for (auto _ : state) benchmark::DoNotOptimize(compute_scale(b, Gamma0{}));
}
BENCHMARK(bm_compute_scale)->Unit(benchmark::kMillisecond);
