#include "pathflow/functionals.hpp"
#include "pathflow/localtime.hpp"
#include "pathflow/paths.hpp"
#include "pathflow/variation.hpp"
#include "pathflow/verify.hpp"
#include "pathflow/young.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace pathflow;

static void BM_SimulateBrownian(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_brownian(n, 1.0, 0.0, seed++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateBrownian)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

static void BM_SimulateStable(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_symmetric_stable(1.5, n, 1.0, seed++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateStable)->Arg(1 << 15);

static void BM_LocalTimeOccupation(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplePath p = simulate_brownian(n, 1.0, 0.0, 1);
    const QVPath qv = quadratic_variation(p);
    const double eps = bandwidth(1.0, n);
    const LevelGrid g = make_level_grid(p.values, eps);
    for (auto _ : state)
        benchmark::DoNotOptimize(local_time_occupation(p, qv, g, eps));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LocalTimeOccupation)->RangeMultiplier(4)->Range(1 << 12, 1 << 16)->Unit(benchmark::kMillisecond);

static void BM_PVariationSup(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplePath p = simulate_brownian(n - 1, 1.0, 0.0, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(p_variation_sup(p.values, 2.5));
}
BENCHMARK(BM_PVariationSup)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

static void BM_PVariationExtrema(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplePath p = simulate_brownian(n - 1, 1.0, 0.0, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(p_variation_extrema(p.values, 2.5));
}
BENCHMARK(BM_PVariationExtrema)->RangeMultiplier(4)->Range(256, 1 << 14)->Unit(benchmark::kMillisecond);

static void BM_YoungIntegral2D(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> axis(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        axis[i] = static_cast<double>(i) / static_cast<double>(n);
    const auto h = GridFunction2D::sample(axis, axis, [](double s, double x) { return std::sin(s + x); });
    const auto G = GridFunction2D::sample(axis, axis, [](double s, double x) { return s * x * x; });
    for (auto _ : state)
        benchmark::DoNotOptimize(young_integral_2d(h, G));
}
BENCHMARK(BM_YoungIntegral2D)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

static void BM_DecomposeSingularRunningMax(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplePath p = simulate_brownian(n, 1.0, 0.0, 3);
    const QVPath qv = quadratic_variation(p);
    const FunctionalSpec F = make_running_max();
    const double eps = bandwidth(1.0, n);
    for (auto _ : state)
        benchmark::DoNotOptimize(decompose_singular(F, p, qv, eps, n));
}
BENCHMARK(BM_DecomposeSingularRunningMax)->Arg(1 << 13)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

static void BM_DecomposeYoungFps(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplePath p = simulate_brownian(n, 1.0, 0.0, 4);
    const QVPath qv = quadratic_variation(p);
    const FunctionalSpec F = make_fps(gaussian_bump_phi, 4.0);
    const double eps = bandwidth(1.0, n);
    const LevelGrid g = make_level_grid(p.values, eps);
    for (auto _ : state)
        benchmark::DoNotOptimize(decompose_young(F, p, qv, g, eps, n));
}
BENCHMARK(BM_DecomposeYoungFps)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

static void BM_DecomposeSmoothSquare(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const SamplePath p = simulate_brownian(n, 1.0, 0.0, 5);
    const QVPath qv = quadratic_variation(p);
    const MollifiedFunctional M = mollify(make_square(), 64);
    for (auto _ : state)
        benchmark::DoNotOptimize(decompose_smooth(M, p, qv, n));
}
BENCHMARK(BM_DecomposeSmoothSquare)->Arg(1 << 12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
