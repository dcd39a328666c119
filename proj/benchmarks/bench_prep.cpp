#include <benchmark/benchmark.h>

#include "sehsn/io/cube.hpp"
#include "sehsn/prep/pca.hpp"
#include "sehsn/prep/standardize.hpp"
#include "sehsn/random.hpp"

using namespace sehsn;

namespace {

// Indian Pines extents after band removal.
io::HyperspectralCube scene(std::size_t bands) {
  io::HyperspectralCube c(145, 145, bands);
  Pcg32 rng(1);
  for (auto& v : c.data()) v = rng.uniform(0, 1);
  return prep::standardize_bands(c);
}

void BM_FitPca(benchmark::State& state) {
  const io::HyperspectralCube c = scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(prep::fit_pca(c, 30));
}
BENCHMARK(BM_FitPca)->Arg(103)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ApplyPca(benchmark::State& state) {
  const io::HyperspectralCube c = scene(200);
  const prep::PcaModel m = prep::fit_pca(c, 30);
  for (auto _ : state) benchmark::DoNotOptimize(prep::apply_pca(c, m));
}
BENCHMARK(BM_ApplyPca)->Unit(benchmark::kMillisecond);

}  // namespace
