#ifndef LOADRANK_STATS_HPP
#define LOADRANK_STATS_HPP

#include <optional>
#include <vector>

#include "loadrank/matrix.hpp"

namespace loadrank {

/// Symmetric matrix with unit diagonal and entries in [-1, 1].
struct CorrelationMatrix {
    Matrix values;

    std::size_t dim() const { return values.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // descending, clamped at 0
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// Pearson correlation of an already standardized matrix: R = X'X / n.
/// Symmetrized, unit diagonal, entries clamped to [-1, 1].
CorrelationMatrix correlation_matrix(const Matrix& standardized);

/// Cyclic Jacobi eigensolver for symmetric matrices. Converged when the
/// off-diagonal Frobenius norm falls to 1e-12; throws NumericalFailure after
/// max_sweeps. Eigenvalues are clamped at zero (correlation matrices are PSD
/// up to roundoff), sorted descending, and each eigenvector's
/// largest-magnitude entry is made positive.
EigenDecomposition eigen_sym(const CorrelationMatrix& R, int max_sweeps = 100);

/// Upper-tail chi-square probability Q(dof/2, statistic/2) via the
/// regularized incomplete gamma function. Absolute accuracy ~1e-10.
double chi_square_p(double statistic, int dof);

/// Chi-square independence test of a continuous feature against integer
/// classes, after quantile binning into n_bins bins (duplicate edges merged).
/// Returns nullopt when the feature is untestable (fewer than two distinct
/// values, or the contingency table collapses).
std::optional<TestResult> chi_square_feature_test(const std::vector<double>& feature,
                                                  const std::vector<int>& y,
                                                  int n_bins = 5);

/// Bartlett's test of sphericity:
///   statistic = -(n - 1 - (2p + 5) / 6) * ln det(R),  dof = p(p-1)/2,
/// with det computed from the eigenvalues. A numerically singular R reports
/// an infinite statistic and p = 0 (maximally non-spherical).
TestResult bartlett_sphericity(const CorrelationMatrix& R, std::size_t n_samples);

/// Overall Kaiser-Meyer-Olkin sampling adequacy. With S = R^-1 and partial
/// correlations q_ij = -s_ij / sqrt(s_ii s_jj),
///   KMO = sum r_ij^2 / (sum r_ij^2 + sum q_ij^2)   over i != j.
/// Returns nullopt when R is singular or when both sums vanish (identity R).
std::optional<double> kmo(const CorrelationMatrix& R);

}  // namespace loadrank

#endif
