#include <benchmark/benchmark.h>

#include <cmath>

#include "lenspec/analysis.hpp"
#include "lenspec/orbits.hpp"
#include "lenspec/schottky.hpp"

using namespace lenspec;

namespace {

std::vector<Eigen::Matrix2d> schottky_generators() {
  Eigen::Matrix2d a, b;
  a << 2, 1.5, 2, 2;
  b << 4, 15, 1, 4;
  return {a, b};
}

MetricModel bumped_cylinder() {
  return MetricModel::perturbed(MetricModel::cylinder(2.0), {-0.4, 0.5, ChartId::cylinder}, 0.9, 0.08);
}

LengthSpectrum exact_spectrum(int max_word_length) {
  const auto gens = schottky_generators();
  const double horizon = completeness_horizon(MetricModel::schottky(gens), max_word_length);
  LengthSpectrum spec(horizon);
  for (const auto& w : enumerate_classes(gens, max_word_length, true)) {
    const double l = exact_length(w, gens);
    if (l <= horizon) spec.insert(make_entry(w, l, 1, 2.0 * std::sinh(0.5 * l)));
  }
  return spec;
}

}  // namespace

static void BM_GeodesicFlow(benchmark::State& state) {
  const auto m = bumped_cylinder();
  const auto xi = unit_phase_point(m, {-0.3, 0.4, ChartId::cylinder}, 1.2);
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate_geodesic(m, xi, t, 1e-11));
}
BENCHMARK(BM_GeodesicFlow)->Arg(1)->Arg(10)->Unit(benchmark::kMicrosecond);

static void BM_JacobiFlow(benchmark::State& state) {
  const auto m = bumped_cylinder();
  const auto xi = unit_phase_point(m, {-0.3, 0.4, ChartId::cylinder}, 1.2);
  for (auto _ : state) benchmark::DoNotOptimize(integrate_jacobi_flow(m, xi, 2.0, 1e-11));
}
BENCHMARK(BM_JacobiFlow)->Unit(benchmark::kMicrosecond);

static void BM_ExactLength(benchmark::State& state) {
  const auto gens = schottky_generators();
  const auto words = enumerate_classes(gens, 6, true);
  for (auto _ : state) {
    double total = 0.0;
    for (const auto& w : words) total += exact_length(w, gens);
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(words.size()));
}
BENCHMARK(BM_ExactLength);

static void BM_SchottkyOrbitSearch(benchmark::State& state) {
  const auto model = MetricModel::schottky(schottky_generators());
  const Word w = Word::parse(state.range(0) == 2 ? "ab" : "aabAB");
  for (auto _ : state) benchmark::DoNotOptimize(find_closed_geodesic(model, w));
}
BENCHMARK(BM_SchottkyOrbitSearch)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_PerturbedOrbitSearch(benchmark::State& state) {
  const auto model = bumped_cylinder();
  for (auto _ : state) benchmark::DoNotOptimize(find_closed_geodesic(model, Word::parse("a")));
}
BENCHMARK(BM_PerturbedOrbitSearch)->Unit(benchmark::kMillisecond);

static void BM_Zeta(benchmark::State& state) {
  const auto spec = exact_spectrum(6);
  for (auto _ : state) benchmark::DoNotOptimize(weighted_zeta(spec, {2.0, 1.0}, 50));
}
BENCHMARK(BM_Zeta)->Unit(benchmark::kMicrosecond);

static void BM_Entropy(benchmark::State& state) {
  const auto spec = exact_spectrum(6);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_entropy(spec));
}
BENCHMARK(BM_Entropy)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
