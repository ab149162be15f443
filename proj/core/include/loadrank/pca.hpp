#ifndef LOADRANK_PCA_HPP
#define LOADRANK_PCA_HPP

#include <string>
#include <vector>

#include "loadrank/matrix.hpp"
#include "loadrank/stats.hpp"

namespace loadrank {

/// Loadings a_ij = sqrt(lambda_j) * e_ij, features by components. With all
/// components present, each row has unit norm (the communality of a
/// standardized variable) and column j has squared norm lambda_j.
struct LoadingMatrix {
    Matrix values;  // p x p
    std::vector<std::string> feature_names;
    std::size_t component_count_total = 0;
};

struct ComponentSelection {
    std::size_t count = 0;
    double cumulative_variance = 0.0;
};

enum class RankMethod { PcaAbs, PcaSquare, FaPriority };

const char* rank_method_name(RankMethod method);

/// Feature order with scores, best first. Scores are non-increasing along
/// the order; ties break toward the smaller original feature index.
struct FeatureRanking {
    std::vector<std::size_t> indices;       // original feature indices, ranked
    std::vector<double> scores;             // aligned with `indices`
    std::vector<std::string> feature_names; // aligned with `indices`
    RankMethod method = RankMethod::PcaAbs;

    std::size_t size() const { return indices.size(); }
};

LoadingMatrix pca_loadings(const EigenDecomposition& eig,
                           const std::vector<std::string>& feature_names);

/// Smallest k whose cumulative variance proportion (denominator p, the total
/// variance of standardized data) reaches the threshold. Threshold must lie
/// in (0, 1].
ComponentSelection select_components(const std::vector<double>& eigenvalues,
                                     double threshold = 0.85);

/// Score_i = sum_{j<=count} |a_ij|.
FeatureRanking score_abs(const LoadingMatrix& loadings, const ComponentSelection& sel);

/// Score_i = sum_{j<=count} a_ij^2. The default ranking for downstream
/// evaluation.
FeatureRanking score_square(const LoadingMatrix& loadings, const ComponentSelection& sel);

/// Shared ordering rule: sort descending by score, ties toward the smaller
/// feature index.
FeatureRanking make_ranking(const std::vector<double>& scores,
                            const std::vector<std::string>& feature_names,
                            RankMethod method);

}  // namespace loadrank

#endif
