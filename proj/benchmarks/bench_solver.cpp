// Microbenchmarks for the solver hot paths: the dual iteration at a few
// channel sizes, water-filling, the rate functional, and the oracle.

#include "pacap/baselines.hpp"
#include "pacap/ergodic.hpp"
#include "pacap/oracle.hpp"
#include "pacap/perantenna.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace pacap;

ChannelMatrix make_channel(int m, int n, std::uint64_t salt) {
    StreamRng rng = StreamRng::derive(42, salt, 0);
    return rayleigh_sample(m, n, rng);
}

void BM_OptCov(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const int n = static_cast<int>(state.range(1));
    const ChannelMatrix ch = make_channel(m, n, 1);
    const PowerConstraint p(RVec::Constant(n, 1.0 / n));
    for (auto _ : state) {
        benchmark::DoNotOptimize(opt_cov(ch, p, 1e-8, {10000, false}));
    }
}
BENCHMARK(BM_OptCov)->Args({2, 2})->Args({4, 4})->Args({2, 4})->Args({4, 2})->Args({8, 8});

void BM_Waterfill(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const ChannelMatrix ch = make_channel(d, d, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(waterfill_sum(ch, 1.0));
    }
}
BENCHMARK(BM_Waterfill)->Arg(2)->Arg(4)->Arg(8);

void BM_Rate(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const ChannelMatrix ch = make_channel(d, d, 3);
    const InputCovariance q(diag_matrix(RVec::Constant(d, 1.0 / d)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(rate(ch, q));
    }
}
BENCHMARK(BM_Rate)->Arg(2)->Arg(4)->Arg(8);

void BM_PgSolve(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    const ChannelMatrix ch = make_channel(d, d, 4);
    const PowerConstraint p(RVec::Constant(d, 1.0 / d));
    OracleConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pg_solve(ch, p, cfg));
    }
}
BENCHMARK(BM_PgSolve)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
