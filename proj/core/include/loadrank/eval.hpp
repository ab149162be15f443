#ifndef LOADRANK_EVAL_HPP
#define LOADRANK_EVAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "loadrank/dataset.hpp"
#include "loadrank/forest.hpp"
#include "loadrank/pca.hpp"
#include "loadrank/stats.hpp"

namespace loadrank {

/// Mean test accuracy as a function of ranked-prefix length.
struct AccuracyCurve {
    std::string method;
    std::vector<double> mean_accuracy;  // entry k-1: first k ranked features
    int repeats = 0;
    std::vector<std::uint64_t> seeds;  // first-level derived seeds (one per repeat,
                                       // or one per shuffle for baselines)
};

struct ShortlistResult {
    std::size_t k_steady = 0;
    double delta = 0.0;
    double reference_accuracy = 0.0;
};

struct PrefilterRecord {
    std::string feature;
    std::optional<TestResult> test;  // nullopt: not testable
    bool kept = false;
};

struct PrefilterResult {
    Dataset dataset;  // retained columns, original order
    std::vector<PrefilterRecord> records;
};

struct EvalOptions {
    int repeats = 100;
    double test_fraction = 0.25;
    std::uint64_t base_seed = 0;
    TrainConfig forest;
    int threads = 1;  // outputs are independent of this
};

/// Keeps features whose chi-square p-value against the target is below
/// alpha; untestable features are dropped. Throws EmptySelection when
/// nothing survives.
PrefilterResult prefilter(const Dataset& dataset, double alpha = 0.05, int n_bins = 5);

/// For every prefix length k of the ranking, runs `repeats` stratified
/// split / fit / score rounds and records the mean test accuracy. Seeds are
/// derived per (repeat, prefix), so growing the ranking or the repeat count
/// never perturbs earlier cells, and the result is identical for any thread
/// count.
AccuracyCurve accuracy_curve(const Dataset& dataset, const FeatureRanking& ranking,
                             const EvalOptions& options);

/// Position-wise mean curve over `shuffles` uniformly random orderings of
/// `features`. Split and forest seeds per (repeat, prefix) match
/// accuracy_curve's with the same base seed; the shuffle index only drives
/// the ordering.
AccuracyCurve random_baseline(const Dataset& dataset,
                              const std::vector<std::size_t>& features,
                              int shuffles, const EvalOptions& options);

/// Smallest prefix whose mean accuracy is within delta (relative) of the
/// curve's maximum.
ShortlistResult steady_point(const AccuracyCurve& curve, double delta = 0.005);

struct TopKRow {
    std::string method;
    std::size_t k_used = 0;
    double mean_accuracy = 0.0;
    bool truncated = false;  // curve shorter than the requested k
};

std::vector<TopKRow> top_k_summary(const std::vector<AccuracyCurve>& curves,
                                   std::size_t k = 20);

/// Fixed export schema: header "k,mean_accuracy,method".
std::string curve_to_csv(const AccuracyCurve& curve);

}  // namespace loadrank

#endif
