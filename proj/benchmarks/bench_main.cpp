#include <benchmark/benchmark.h>

#include "dlab/exponents.hpp"
#include "dlab/nls.hpp"
#include "dlab/norms.hpp"
#include "dlab/random.hpp"
#include "dlab/spectral.hpp"

using namespace dlab;

namespace {

SpectralState annulus(int n, int N, std::uint64_t seed) {
    DataSpec spec;
    spec.family = DataFamily::random_phase;
    spec.seed = seed;
    return make_annulus_data(spec, PhaseFunction::fractional(1.5, n), N, 4, {0.0, 1.0});
}

void BM_Synthesize(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int N = static_cast<int>(state.range(1));
    const auto u = annulus(n, N, 1);
    const auto phi = PhaseFunction::fractional(1.5, n);
    SpaceTimeGrid grid;
    grid.points_per_dim = alias_free_points(support_bounds(u).width(), 4);
    grid.time_nodes = {0.0, 0.25, 0.5, 0.75};
    for (auto _ : state) benchmark::DoNotOptimize(synthesize(u, grid, phi).values.data());
}
BENCHMARK(BM_Synthesize)->Args({1, 256})->Args({2, 16})->Unit(benchmark::kMicrosecond);

void BM_SpacetimeL4(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto u = annulus(1, N, 2);
    const auto phi = PhaseFunction::fractional(1.5, 1);
    NormSpec spec;
    spec.p = 4;
    spec.interval = {0.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(spacetime_lp_norm(u, phi, spec).value);
}
BENCHMARK(BM_SpacetimeL4)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_StepStrang(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int R = static_cast<int>(state.range(1));
    Rng rng(3);
    SpectralState u(n, R);
    for (auto& c : u.coefficients()) c = 0.01 * rng.complex_normal();
    SplitStepConfig cfg;
    cfg.phi = n == 1 ? PhaseFunction::quadratic({1}) : PhaseFunction::quadratic({1, -1});
    cfg.box_radius = R;
    SplitStepper stepper(cfg);
    for (auto _ : state) {
        u = stepper.step(u);
        benchmark::DoNotOptimize(u.coefficients().data());
    }
}
BENCHMARK(BM_StepStrang)->Args({1, 256})->Args({2, 32})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
