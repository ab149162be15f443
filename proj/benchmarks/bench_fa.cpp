#include <benchmark/benchmark.h>

#include "loadrank/fa.hpp"
#include "oracles.hpp"

using namespace loadrank;

static void BM_Varimax(benchmark::State& state) {
    std::size_t p = static_cast<std::size_t>(state.range(0));
    CorrelationMatrix r{oracles::random_correlation(p, 11, p + 5)};
    EigenDecomposition eig = eigen_sym(r);
    Matrix loadings = extract_factors(eig, 0.85);
    for (auto _ : state) {
        benchmark::DoNotOptimize(varimax(loadings));
    }
}
BENCHMARK(BM_Varimax)->Arg(20)->Arg(40)->Arg(80);

static void BM_FitFactorModel(benchmark::State& state) {
    std::size_t p = static_cast<std::size_t>(state.range(0));
    CorrelationMatrix r{oracles::random_correlation(p, 23, p + 5)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_factor_model(r, 500));
    }
}
BENCHMARK(BM_FitFactorModel)->Arg(20)->Arg(40);
