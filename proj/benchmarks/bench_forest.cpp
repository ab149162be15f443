#include <benchmark/benchmark.h>

#include "loadrank/eval.hpp"
#include "loadrank/forest.hpp"
#include "loadrank/synth.hpp"

using namespace loadrank;

namespace {

Dataset bench_dataset(std::size_t n, std::size_t informative, std::size_t noise) {
    SynthSpec spec;
    spec.n_samples = n;
    spec.n_informative = informative;
    spec.n_noise = noise;
    spec.n_factors = 2;
    spec.n_classes = 4;
    spec.seed = 1;
    return generate_synthetic(spec);
}

}  // namespace

static void BM_ForestFit(benchmark::State& state) {
    Dataset ds = bench_dataset(static_cast<std::size_t>(state.range(0)), 8, 2);
    TrainConfig cfg;
    cfg.n_trees = static_cast<int>(state.range(1));
    cfg.seed = 9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit(ds, cfg));
    }
}
BENCHMARK(BM_ForestFit)->Args({450, 15})->Args({450, 100})->Args({2000, 15});

static void BM_ForestPredict(benchmark::State& state) {
    Dataset train = bench_dataset(450, 8, 2);
    Dataset probe = bench_dataset(150, 8, 2);
    TrainConfig cfg;
    cfg.n_trees = 100;
    cfg.seed = 9;
    RandomForest forest = fit(train, cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict(forest, probe.X));
    }
}
BENCHMARK(BM_ForestPredict);

static void BM_AccuracyCurve(benchmark::State& state) {
    Dataset ds = bench_dataset(300, 6, 0);
    FeatureRanking ranking;
    ranking.method = RankMethod::PcaSquare;
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
        ranking.indices.push_back(j);
        ranking.feature_names.push_back(ds.feature_names[j]);
        ranking.scores.push_back(1.0);
    }
    EvalOptions options;
    options.repeats = 10;
    options.forest.n_trees = 15;
    options.threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(accuracy_curve(ds, ranking, options));
    }
}
BENCHMARK(BM_AccuracyCurve)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
