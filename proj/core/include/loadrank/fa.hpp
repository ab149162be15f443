#ifndef LOADRANK_FA_HPP
#define LOADRANK_FA_HPP

#include <optional>
#include <string>
#include <vector>

#include "loadrank/matrix.hpp"
#include "loadrank/pca.hpp"
#include "loadrank/stats.hpp"

namespace loadrank {

/// KMO + Bartlett adequacy gate. Factor analysis runs only when the gate
/// passes; a failed gate is a reported state (the "NA" cells of a results
/// table), never an error.
struct FaGate {
    std::optional<double> kmo_value;  // nullopt when KMO is not applicable
    TestResult bartlett;
    bool passed = false;
};

FaGate fa_gate(const CorrelationMatrix& R, std::size_t n_samples,
               double kmo_minimum = 0.6, double bartlett_alpha = 0.05);

/// Principal-component extraction: column j of the result is
/// sqrt(lambda_j) * e_j for the m components passing the cumulative-variance
/// rule.
Matrix extract_factors(const EigenDecomposition& eig, double variance_threshold = 0.85);

struct VarimaxResult {
    Matrix loadings;
    double criterion = 0.0;
    int sweeps = 0;
    bool converged = true;
};

/// Orthogonal varimax rotation by pairwise planar rotations, maximizing the
/// raw criterion
///   V = sum_j [ (1/p) sum_i a_ij^4 - ((1/p) sum_i a_ij^2)^2 ].
/// V never decreases across sweeps. After convergence each column's
/// largest-magnitude entry is made positive and columns are reordered by
/// descending sum of squared loadings. A single factor is returned unchanged.
/// Hitting max_sweeps returns the best rotation so far with converged=false.
VarimaxResult varimax(const Matrix& loadings, double tol = 1e-8, int max_sweeps = 100);

struct FactorAssignment {
    std::size_t feature = 0;
    std::size_t factor = 0;   // 1-based
    double loading = 0.0;     // signed rotated loading at the argmax factor
};

/// Assigns each feature to its largest-|loading| factor (ties to the smaller
/// factor index) and keeps it only when |loading| >= threshold. An empty
/// result is a reported state, not an error.
std::vector<FactorAssignment> assign_features(const Matrix& rotated,
                                              double threshold = 0.5);

/// Factor-priority scores: Score = |loading| + (m - j + 1) for a feature in
/// factor j of m. Because |loading| stays within [0, 1], every factor-j
/// feature outranks every factor-(j+1) feature; the function asserts that
/// block ordering on each call.
FeatureRanking fa_priority_rank(const std::vector<FactorAssignment>& assignments,
                                std::size_t m,
                                const std::vector<std::string>& feature_names);

struct FactorModel {
    FaGate gate;
    std::size_t m = 0;
    Matrix unrotated_loadings;  // p x m
    Matrix rotated_loadings;    // p x m
    std::vector<FactorAssignment> assignments;
    bool rotation_converged = true;

    bool available() const { return gate.passed; }
};

/// Full FA stage over a correlation matrix: gate, extract, rotate, assign.
/// When the gate fails the model carries the gate record only.
FactorModel fit_factor_model(const CorrelationMatrix& R, std::size_t n_samples,
                             double variance_threshold = 0.85,
                             double loading_threshold = 0.5);

}  // namespace loadrank

#endif
