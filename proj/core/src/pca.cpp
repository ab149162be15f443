#include "loadrank/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadrank/errors.hpp"

namespace loadrank {

const char* rank_method_name(RankMethod method) {
    switch (method) {
        case RankMethod::PcaAbs: return "pca_abs";
        case RankMethod::PcaSquare: return "pca_square";
        case RankMethod::FaPriority: return "fa_priority";
    }
    return "unknown";
}

LoadingMatrix pca_loadings(const EigenDecomposition& eig,
                           const std::vector<std::string>& feature_names) {
    const std::size_t p = eig.eigenvalues.size();
    if (feature_names.size() != p) {
        throw ValidationError("feature name count does not match decomposition size");
    }
    LoadingMatrix out;
    out.feature_names = feature_names;
    out.component_count_total = p;
    out.values = Matrix(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        double root = std::sqrt(eig.eigenvalues[j]);
        for (std::size_t i = 0; i < p; ++i) {
            out.values(i, j) = root * eig.eigenvectors(i, j);
        }
    }
    return out;
}

ComponentSelection select_components(const std::vector<double>& eigenvalues,
                                     double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ValidationError("variance threshold must be in (0, 1]");
    }
    const std::size_t p = eigenvalues.size();
    if (p == 0) throw ValidationError("empty eigenvalue list");
    double total = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        if (eigenvalues[j] < 0.0) throw ValidationError("negative eigenvalue");
        if (j > 0 && eigenvalues[j] > eigenvalues[j - 1]) {
            throw ValidationError("eigenvalues must be descending");
        }
        total += eigenvalues[j];
    }
    if (std::abs(total - static_cast<double>(p)) > 1e-6) {
        throw ValidationError("eigenvalues of a correlation matrix must sum to p");
    }

    const double denom = static_cast<double>(p);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        cumulative += eigenvalues[k];
        if (cumulative / denom >= threshold) {
            return ComponentSelection{k + 1, std::min(cumulative / denom, 1.0)};
        }
    }
    // Only reachable when rounding keeps the sum a hair below threshold * p
    // (threshold at or near 1): fall back to the last nonzero eigenvalue.
    std::size_t last = p;
    while (last > 1 && eigenvalues[last - 1] == 0.0) --last;
    return ComponentSelection{last, 1.0};
}

FeatureRanking make_ranking(const std::vector<double>& scores,
                            const std::vector<std::string>& feature_names,
                            RankMethod method) {
    if (scores.size() != feature_names.size()) {
        throw ValidationError("score/name length mismatch");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    FeatureRanking out;
    out.method = method;
    for (std::size_t idx : order) {
        out.indices.push_back(idx);
        out.scores.push_back(scores[idx]);
        out.feature_names.push_back(feature_names[idx]);
    }
    return out;
}

namespace {

FeatureRanking score_loadings(const LoadingMatrix& loadings,
                              const ComponentSelection& sel, bool squared) {
    const std::size_t p = loadings.values.rows();
    if (sel.count < 1 || sel.count > loadings.values.cols()) {
        throw ValidationError("component count out of range");
    }
    std::vector<double> scores(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < sel.count; ++j) {
            double a = loadings.values(i, j);
            scores[i] += squared ? a * a : std::abs(a);
        }
    }
    return make_ranking(scores, loadings.feature_names,
                        squared ? RankMethod::PcaSquare : RankMethod::PcaAbs);
}

}  // namespace

FeatureRanking score_abs(const LoadingMatrix& loadings, const ComponentSelection& sel) {
    return score_loadings(loadings, sel, false);
}

FeatureRanking score_square(const LoadingMatrix& loadings, const ComponentSelection& sel) {
    return score_loadings(loadings, sel, true);
}

}  // namespace loadrank
