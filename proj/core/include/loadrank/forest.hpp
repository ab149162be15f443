#ifndef LOADRANK_FOREST_HPP
#define LOADRANK_FOREST_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "loadrank/dataset.hpp"
#include "loadrank/matrix.hpp"

namespace loadrank {

enum class MaxFeatures { Sqrt, All, Fixed };

struct TrainConfig {
    int n_trees = 100;
    MaxFeatures max_features = MaxFeatures::Sqrt;
    int fixed_features = 1;  // used when max_features == Fixed
    int min_samples_split = 2;
    std::optional<int> max_depth;
    std::uint64_t seed = 0;
    bool bootstrap = true;  // test hook: false trains each tree on all rows
};

/// Flat node array; internal nodes carry a (feature, threshold) pair and the
/// indices of both children, leaves carry per-class sample counts.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int klass = 0;               // majority class at a leaf
    long long count = 0;         // training samples that reached the leaf
    std::vector<long long> class_counts;  // aligned with RandomForest::classes
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    int predict_index(const std::vector<double>& row) const;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    std::vector<int> classes;  // ascending
    TrainConfig config;
    std::size_t n_features = 0;
};

/// Trains n_trees CART trees on bootstrap samples, considering a random
/// feature subset at every split and choosing the threshold that minimizes
/// weighted Gini impurity. Fully deterministic for a fixed seed: tree t draws
/// from its own stream derived from (seed, t).
RandomForest fit(const Dataset& train, const TrainConfig& config);

/// Majority vote across trees; ties break toward the smallest class value.
std::vector<int> predict(const RandomForest& forest, const Matrix& X);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual);

}  // namespace loadrank

#endif
