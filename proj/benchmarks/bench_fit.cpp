#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>

#include "hmhf/bubble_fit.hpp"

using namespace hmhf;

namespace {

SphereField tower(double l1, double l2) {
  const auto g = RadialGrid::graded(1, l1 / 30, 3 * l1, std::max(5.0, 20 * l2), 1.02);
  return sample_radial(
      g, [=](double r) { return 2 * std::atan(r / l1) + 2 * std::atan(r / l2); }, 0.0);
}

}  // namespace

static void bm_extract_tower(benchmark::State& state) {
  const SphereField f = tower(1e-3, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(extract_bubbles(f, {{0, 0}, 3.0}).entries.size());
}
BENCHMARK(bm_extract_tower)->Unit(benchmark::kMillisecond);

static void bm_fit_tower(benchmark::State& state) {
  const SphereField f = tower(1e-3, 0.3);
  const Disc d{{0, 0}, 3.0};
  const ExtractionSet seeds = extract_bubbles(f, d);
  for (auto _ : state) benchmark::DoNotOptimize(fit_config(f, d, seeds, Gamma0{}).report.total);
}
BENCHMARK(bm_fit_tower)->Unit(benchmark::kMillisecond);
