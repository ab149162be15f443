#include "loadrank/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <thread>

#include "loadrank/errors.hpp"
#include "loadrank/rng.hpp"

namespace loadrank {

namespace {

constexpr std::uint64_t kRepeatTag = 0x52455045ULL;   // "REPE"
constexpr std::uint64_t kSplitTag = 0x53504c49ULL;    // "SPLI"
constexpr std::uint64_t kForestTag = 0x464f5245ULL;   // "FORE"
constexpr std::uint64_t kShuffleTag = 0x53485546ULL;  // "SHUF"

/// Runs tasks 0..count-1 on `threads` workers pulling from a shared counter.
/// Each task writes only its own output slot, so results never depend on the
/// worker count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& task) {
    int workers = std::max(1, threads);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto body = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                task(i);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(failure);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

PrefilterResult prefilter(const Dataset& dataset, double alpha, int n_bins) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
    PrefilterResult out;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
        PrefilterRecord rec;
        rec.feature = dataset.feature_names[j];
        rec.test = chi_square_feature_test(dataset.X.column(j), dataset.y, n_bins);
        rec.kept = rec.test.has_value() && rec.test->p_value < alpha;
        if (rec.kept) kept.push_back(j);
        out.records.push_back(std::move(rec));
    }
    if (kept.empty()) {
        throw EmptySelection("chi-square prefilter retained no features");
    }
    out.dataset = dataset.select_features(kept);
    return out;
}

AccuracyCurve accuracy_curve(const Dataset& dataset, const FeatureRanking& ranking,
                             const EvalOptions& options) {
    if (options.repeats < 1) throw ValidationError("repeats must be >= 1");
    const std::size_t K = ranking.size();
    if (K == 0) throw ValidationError("empty ranking");
    for (std::size_t idx : ranking.indices) {
        if (idx >= dataset.n_features()) {
            throw ValidationError("ranking refers to a feature outside the dataset");
        }
    }

    AccuracyCurve curve;
    curve.method = rank_method_name(ranking.method);
    curve.repeats = options.repeats;
    const std::size_t R = static_cast<std::size_t>(options.repeats);
    for (std::size_t r = 0; r < R; ++r) {
        curve.seeds.push_back(derive_seed(options.base_seed, {kRepeatTag, r}));
    }

    // Per-prefix column views, built once. Column order follows the ranking.
    std::vector<Dataset> prefixes;
    prefixes.reserve(K);
    for (std::size_t k = 1; k <= K; ++k) {
        prefixes.push_back(dataset.select_features(
            {ranking.indices.begin(), ranking.indices.begin() + static_cast<long>(k)}));
    }

    std::vector<double> cell(K * R, 0.0);
    parallel_for(K * R, options.threads, [&](std::size_t task) {
        std::size_t k = task / R;  // prefix index, 0-based
        std::size_t r = task % R;
        std::uint64_t repeat_seed = curve.seeds[r];
        auto [train, test] = split(prefixes[k], options.test_fraction,
                                   derive_seed(repeat_seed, {kSplitTag, k + 1}));
        TrainConfig cfg = options.forest;
        cfg.seed = derive_seed(repeat_seed, {kForestTag, k + 1});
        RandomForest forest = fit(train, cfg);
        cell[task] = accuracy(predict(forest, test.X), test.y);
    });

    curve.mean_accuracy.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        double sum = 0.0;
        for (std::size_t r = 0; r < R; ++r) sum += cell[k * R + r];
        curve.mean_accuracy[k] = sum / static_cast<double>(R);
    }
    return curve;
}

AccuracyCurve random_baseline(const Dataset& dataset,
                              const std::vector<std::size_t>& features, int shuffles,
                              const EvalOptions& options) {
    if (shuffles < 1) throw ValidationError("shuffles must be >= 1");
    if (features.empty()) throw ValidationError("empty feature list");

    AccuracyCurve out;
    out.method = "random_baseline";
    out.repeats = options.repeats;
    out.mean_accuracy.assign(features.size(), 0.0);

    for (int s = 0; s < shuffles; ++s) {
        std::uint64_t shuffle_seed =
            derive_seed(options.base_seed, {kShuffleTag, static_cast<std::uint64_t>(s)});
        out.seeds.push_back(shuffle_seed);

        std::vector<std::size_t> order = features;
        Pcg32 rng(shuffle_seed);
        shuffle_inplace(order, rng);

        FeatureRanking shuffled;
        shuffled.method = RankMethod::PcaAbs;  // tag unused; curve renamed below
        shuffled.indices = order;
        for (std::size_t idx : order) {
            shuffled.feature_names.push_back(dataset.feature_names.at(idx));
            shuffled.scores.push_back(0.0);
        }
        AccuracyCurve curve = accuracy_curve(dataset, shuffled, options);
        for (std::size_t k = 0; k < curve.mean_accuracy.size(); ++k) {
            out.mean_accuracy[k] += curve.mean_accuracy[k];
        }
    }
    for (double& v : out.mean_accuracy) v /= static_cast<double>(shuffles);
    return out;
}

ShortlistResult steady_point(const AccuracyCurve& curve, double delta) {
    if (curve.mean_accuracy.empty()) throw ValidationError("empty accuracy curve");
    if (delta < 0.0) throw ValidationError("delta must be >= 0");
    double reference = *std::max_element(curve.mean_accuracy.begin(),
                                         curve.mean_accuracy.end());
    double bar = (1.0 - delta) * reference;
    for (std::size_t k = 0; k < curve.mean_accuracy.size(); ++k) {
        if (curve.mean_accuracy[k] >= bar) {
            return ShortlistResult{k + 1, delta, reference};
        }
    }
    return ShortlistResult{curve.mean_accuracy.size(), delta, reference};
}

std::vector<TopKRow> top_k_summary(const std::vector<AccuracyCurve>& curves,
                                   std::size_t k) {
    if (k < 1) throw ValidationError("top-k summary requires k >= 1");
    std::vector<TopKRow> rows;
    for (const AccuracyCurve& curve : curves) {
        if (curve.mean_accuracy.empty()) throw ValidationError("empty accuracy curve");
        TopKRow row;
        row.method = curve.method;
        row.k_used = std::min(k, curve.mean_accuracy.size());
        row.truncated = curve.mean_accuracy.size() < k;
        row.mean_accuracy = curve.mean_accuracy.at(row.k_used - 1);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string curve_to_csv(const AccuracyCurve& curve) {
    std::string out = "k,mean_accuracy,method\n";
    for (std::size_t k = 0; k < curve.mean_accuracy.size(); ++k) {
        out += std::to_string(k + 1);
        out += ',';
        out += format_double(curve.mean_accuracy[k]);
        out += ',';
        out += curve.method;
        out += '\n';
    }
    return out;
}

}  // namespace loadrank
