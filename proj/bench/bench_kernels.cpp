// Parallel kernels against their serial references. On a single core the
// pairs should match; the gap shows up with OMP_NUM_THREADS > 1.

#include <benchmark/benchmark.h>

#include <random>

#include "umdlab/bellman.hpp"
#include "umdlab/lp_estimator.hpp"
#include "umdlab/multipliers.hpp"

using namespace umdlab;

namespace {

BellmanGrid fresh_grid(int M) {
    BellmanParams p;
    p.p = 4.0;
    p.beta = 3.2;
    p.resolution = M;
    BellmanGrid g(p);
    initial_surface(g);
    return g;
}

template <bool Serial>
void BM_directional_concavify(benchmark::State& state) {
    const auto base = fresh_grid(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        state.PauseTiming();
        auto g = base;
        state.ResumeTiming();
        if constexpr (Serial)
            directional_concavify_serial(g, 1.0);
        else
            directional_concavify(g, 1.0);
        benchmark::DoNotOptimize(g.values().data());
    }
}

template <bool Serial>
void BM_homogeneity_pass(benchmark::State& state) {
    auto g = fresh_grid(static_cast<int>(state.range(0)));
    bellman_step(g);
    for (auto _ : state) {
        if constexpr (Serial)
            homogeneity_pass_serial(g);
        else
            homogeneity_pass(g);
        benchmark::DoNotOptimize(g.values().data());
    }
}

template <bool Serial>
void BM_lattice_table(benchmark::State& state) {
    const auto spec = SymbolSpec::shifted_power(2, 1.3, 0.5);
    const int N = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto t = Serial ? lattice_table_serial(spec, N) : lattice_table(spec, N);
        benchmark::DoNotOptimize(t.values.data());
    }
}

template <bool Serial>
void BM_multiplier_apply(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const auto op = make_operator(SymbolSpec::beurling_ahlfors(), N, SpaceSpec(2, 2.0));
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss;
    std::vector<Scalar> in(static_cast<std::size_t>(N) * N * 2), out(in.size());
    for (auto& z : in) z = Scalar(gauss(rng), gauss(rng));
    for (auto _ : state) {
        if constexpr (Serial)
            op.apply_serial(in, out);
        else
            op.apply(in, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Serial>
void BM_norm_lower_bound(benchmark::State& state) {
    const auto op = make_operator(SymbolSpec::power_quotient(2.0, {1.0, -1.0}), static_cast<int>(state.range(0)),
                                  SpaceSpec::scalar());
    LpEstimateOptions o;
    o.p = 4.0;
    o.restarts = 4;
    o.max_iter = 100;
    o.serial = Serial;
    for (auto _ : state) benchmark::DoNotOptimize(norm_lower_bound(op, o).value);
}

}  // namespace

BENCHMARK(BM_directional_concavify<false>)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_directional_concavify<true>)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_homogeneity_pass<false>)->Arg(201)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_homogeneity_pass<true>)->Arg(201)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_lattice_table<false>)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_lattice_table<true>)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_multiplier_apply<false>)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_multiplier_apply<true>)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_norm_lower_bound<false>)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_norm_lower_bound<true>)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
