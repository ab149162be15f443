#include <benchmark/benchmark.h>

#include "loadrank/stats.hpp"
#include "oracles.hpp"

using namespace loadrank;

static void BM_EigenSym(benchmark::State& state) {
    std::size_t p = static_cast<std::size_t>(state.range(0));
    CorrelationMatrix r{oracles::random_correlation(p, 42)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigen_sym(r));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EigenSym)->Arg(10)->Arg(20)->Arg(40)->Arg(80)->Complexity();

static void BM_ChiSquareP(benchmark::State& state) {
    double statistic = 0.5;
    for (auto _ : state) {
        statistic += 1.0;
        if (statistic > 60.0) statistic = 0.5;
        benchmark::DoNotOptimize(chi_square_p(statistic, 10));
    }
}
BENCHMARK(BM_ChiSquareP);

static void BM_Kmo(benchmark::State& state) {
    std::size_t p = static_cast<std::size_t>(state.range(0));
    CorrelationMatrix r{oracles::random_correlation(p, 7)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(kmo(r));
    }
}
BENCHMARK(BM_Kmo)->Arg(20)->Arg(40);

static void BM_ChiSquareFeatureTest(benchmark::State& state) {
    Pcg32 rng(3);
    GaussianGen gauss{Pcg32(4)};
    std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<double> feature(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        feature[i] = gauss.next();
        y[i] = 1 + static_cast<int>(rng.next_below(4));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(chi_square_feature_test(feature, y, 5));
    }
}
BENCHMARK(BM_ChiSquareFeatureTest)->Arg(600)->Arg(5000);
