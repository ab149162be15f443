#include "loadrank/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadrank/errors.hpp"
#include "loadrank/rng.hpp"

namespace loadrank {

namespace {

constexpr std::uint64_t kTreeTag = 0x54524545ULL;  // "TREE"

double gini(const std::vector<long long>& counts, long long total) {
    double g = 1.0;
    for (long long c : counts) {
        double f = static_cast<double>(c) / static_cast<double>(total);
        g -= f * f;
    }
    return g;
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, const std::vector<int>& class_index,
                std::size_t n_classes, const TrainConfig& cfg, Pcg32 rng)
        : data_(data),
          class_index_(class_index),
          n_classes_(n_classes),
          cfg_(cfg),
          rng_(rng),
          feature_pool_(data.n_features()) {
        std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
    }

    DecisionTree build(std::vector<std::size_t> samples) {
        DecisionTree tree;
        grow(tree, std::move(samples), 0);
        return tree;
    }

private:
    std::size_t features_per_split() const {
        const std::size_t p = data_.n_features();
        switch (cfg_.max_features) {
            case MaxFeatures::All: return p;
            case MaxFeatures::Fixed:
                return std::clamp<std::size_t>(
                    static_cast<std::size_t>(std::max(cfg_.fixed_features, 1)), 1, p);
            case MaxFeatures::Sqrt:
            default:
                return std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
        }
    }

    int make_leaf(DecisionTree& tree, const std::vector<long long>& counts,
                  long long total) {
        TreeNode node;
        node.count = total;
        node.class_counts = counts;
        std::size_t best = 0;
        for (std::size_t c = 1; c < counts.size(); ++c) {
            if (counts[c] > counts[best]) best = c;  // ties keep the smaller class
        }
        node.klass = static_cast<int>(best);
        tree.nodes.push_back(std::move(node));
        return static_cast<int>(tree.nodes.size() - 1);
    }

    int grow(DecisionTree& tree, std::vector<std::size_t> samples, int depth) {
        std::vector<long long> counts(n_classes_, 0);
        for (std::size_t s : samples) counts[static_cast<std::size_t>(class_index_[s])]++;
        const long long total = static_cast<long long>(samples.size());

        bool pure = std::count_if(counts.begin(), counts.end(),
                                  [](long long c) { return c > 0; }) <= 1;
        bool depth_capped = cfg_.max_depth.has_value() && depth >= *cfg_.max_depth;
        if (pure || total < cfg_.min_samples_split || depth_capped) {
            return make_leaf(tree, counts, total);
        }

        const double parent_impurity = gini(counts, total);

        // Draw the split's feature subset, then visit it in ascending index
        // order so equal-impurity ties resolve the same way every run.
        const std::size_t k = features_per_split();
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + rng_.next_below(
                                    static_cast<std::uint32_t>(feature_pool_.size() - i));
            std::swap(feature_pool_[i], feature_pool_[j]);
        }
        std::vector<std::size_t> candidates(feature_pool_.begin(),
                                            feature_pool_.begin() + static_cast<long>(k));
        std::sort(candidates.begin(), candidates.end());

        double best_impurity = parent_impurity - 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, int>> ordered;
        ordered.reserve(samples.size());
        std::vector<long long> left(n_classes_), right(n_classes_);
        for (std::size_t f : candidates) {
            ordered.clear();
            for (std::size_t s : samples) {
                ordered.emplace_back(data_.X(s, f), class_index_[s]);
            }
            std::sort(ordered.begin(), ordered.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::fill(left.begin(), left.end(), 0);
            right = counts;
            long long n_left = 0;
            for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
                left[static_cast<std::size_t>(ordered[i].second)]++;
                right[static_cast<std::size_t>(ordered[i].second)]--;
                ++n_left;
                double v = ordered[i].first;
                double next = ordered[i + 1].first;
                if (v == next) continue;
                double threshold = 0.5 * (v + next);
                if (!(threshold < next)) continue;  // midpoint rounded onto next
                double weighted =
                    (static_cast<double>(n_left) * gini(left, n_left) +
                     static_cast<double>(total - n_left) * gini(right, total - n_left)) /
                    static_cast<double>(total);
                if (weighted < best_impurity) {
                    best_impurity = weighted;
                    best_feature = static_cast<int>(f);
                    best_threshold = threshold;
                }
            }
        }

        if (best_feature < 0) {
            return make_leaf(tree, counts, total);  // no improving split
        }

        std::vector<std::size_t> left_samples, right_samples;
        for (std::size_t s : samples) {
            if (data_.X(s, static_cast<std::size_t>(best_feature)) <= best_threshold) {
                left_samples.push_back(s);
            } else {
                right_samples.push_back(s);
            }
        }
        samples.clear();
        samples.shrink_to_fit();

        TreeNode node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.count = total;
        tree.nodes.push_back(std::move(node));
        int self = static_cast<int>(tree.nodes.size() - 1);
        int left_id = grow(tree, std::move(left_samples), depth + 1);
        int right_id = grow(tree, std::move(right_samples), depth + 1);
        tree.nodes[static_cast<std::size_t>(self)].left = left_id;
        tree.nodes[static_cast<std::size_t>(self)].right = right_id;
        return self;
    }

    const Dataset& data_;
    const std::vector<int>& class_index_;
    std::size_t n_classes_;
    const TrainConfig& cfg_;
    Pcg32 rng_;
    std::vector<std::size_t> feature_pool_;
};

}  // namespace

int DecisionTree::predict_index(const std::vector<double>& row) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(at)];
        at = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                           : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].klass;
}

RandomForest fit(const Dataset& train, const TrainConfig& config) {
    if (train.n_samples() == 0) throw ValidationError("empty training set");
    if (config.n_trees < 1) throw ValidationError("n_trees must be >= 1");
    if (config.min_samples_split < 2) {
        throw ValidationError("min_samples_split must be >= 2");
    }

    RandomForest forest;
    forest.config = config;
    forest.n_features = train.n_features();
    forest.classes = train.y;
    std::sort(forest.classes.begin(), forest.classes.end());
    forest.classes.erase(std::unique(forest.classes.begin(), forest.classes.end()),
                         forest.classes.end());

    std::vector<int> class_index(train.n_samples());
    for (std::size_t i = 0; i < train.n_samples(); ++i) {
        class_index[i] = static_cast<int>(
            std::lower_bound(forest.classes.begin(), forest.classes.end(), train.y[i]) -
            forest.classes.begin());
    }

    const std::size_t n = train.n_samples();
    forest.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int t = 0; t < config.n_trees; ++t) {
        Pcg32 rng(derive_seed(config.seed, {kTreeTag, static_cast<std::uint64_t>(t)}));
        std::vector<std::size_t> samples(n);
        if (config.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                samples[i] = rng.next_below(static_cast<std::uint32_t>(n));
            }
        } else {
            std::iota(samples.begin(), samples.end(), std::size_t{0});
        }
        TreeBuilder builder(train, class_index, forest.classes.size(), config, rng);
        forest.trees.push_back(builder.build(std::move(samples)));
    }
    return forest;
}

std::vector<int> predict(const RandomForest& forest, const Matrix& X) {
    if (X.cols() != forest.n_features) {
        throw ValidationError("feature count mismatch: model expects " +
                              std::to_string(forest.n_features) + ", got " +
                              std::to_string(X.cols()));
    }
    std::vector<int> out(X.rows());
    std::vector<double> row(X.cols());
    std::vector<long long> votes(forest.classes.size());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (std::size_t j = 0; j < X.cols(); ++j) row[j] = X(i, j);
        std::fill(votes.begin(), votes.end(), 0);
        for (const DecisionTree& tree : forest.trees) {
            votes[static_cast<std::size_t>(tree.predict_index(row))]++;
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < votes.size(); ++c) {
            if (votes[c] > votes[best]) best = c;  // ties keep the smaller class
        }
        out[i] = forest.classes[best];
    }
    return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.size() != actual.size()) {
        throw ValidationError("prediction/label length mismatch");
    }
    if (predicted.empty()) throw ValidationError("accuracy of an empty set is undefined");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        hits += predicted[i] == actual[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace loadrank
