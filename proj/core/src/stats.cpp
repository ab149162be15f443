#include "loadrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "loadrank/errors.hpp"

namespace loadrank {

namespace {

double off_diagonal_frobenius(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) sum += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(sum);
}

// Lower regularized incomplete gamma P(a, x) by series expansion; valid for
// x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
// fraction; valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

}  // namespace

CorrelationMatrix correlation_matrix(const Matrix& standardized) {
    const std::size_t n = standardized.rows();
    const std::size_t p = standardized.cols();
    if (n < 2) throw ValidationError("correlation needs at least 2 samples");
    for (double v : standardized.data()) {
        if (!std::isfinite(v)) throw ValidationError("non-finite value in input matrix");
    }
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += standardized(i, j);
        mean /= static_cast<double>(n);
        if (std::abs(mean) > 1e-6) {
            throw ValidationError("correlation_matrix expects standardized (mean-0) input");
        }
    }

    Matrix r(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = j; k < p; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += standardized(i, j) * standardized(i, k);
            dot /= static_cast<double>(n);
            r(j, k) = dot;
            r(k, j) = dot;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        r(j, j) = 1.0;
        for (std::size_t k = 0; k < p; ++k) {
            r(j, k) = std::clamp(r(j, k), -1.0, 1.0);
        }
    }
    return CorrelationMatrix{std::move(r)};
}

EigenDecomposition eigen_sym(const CorrelationMatrix& R, int max_sweeps) {
    const std::size_t p = R.dim();
    Matrix a = R.values;
    Matrix v = Matrix::identity(p);

    const double target = 1e-12;
    bool converged = off_diagonal_frobenius(a) <= target;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t i = 0; i + 1 < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                double apq = a(i, j);
                if (apq == 0.0) continue;
                double app = a(i, i);
                double aqq = a(j, j);
                double theta = 0.5 * (aqq - app) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                double tau = s / (1.0 + c);

                a(i, i) = app - t * apq;
                a(j, j) = aqq + t * apq;
                a(i, j) = 0.0;
                a(j, i) = 0.0;
                for (std::size_t k = 0; k < p; ++k) {
                    if (k == i || k == j) continue;
                    double aki = a(k, i);
                    double akj = a(k, j);
                    a(k, i) = aki - s * (akj + tau * aki);
                    a(i, k) = a(k, i);
                    a(k, j) = akj + s * (aki - tau * akj);
                    a(j, k) = a(k, j);
                }
                for (std::size_t k = 0; k < p; ++k) {
                    double vki = v(k, i);
                    double vkj = v(k, j);
                    v(k, i) = vki - s * (vkj + tau * vki);
                    v(k, j) = vkj + s * (vki - tau * vkj);
                }
            }
        }
        converged = off_diagonal_frobenius(a) <= target;
    }
    if (!converged) {
        throw NumericalFailure("Jacobi eigensolver did not converge within " +
                               std::to_string(max_sweeps) + " sweeps");
    }

    std::vector<double> eigenvalues(p);
    for (std::size_t i = 0; i < p; ++i) eigenvalues[i] = a(i, i);
    for (double lambda : eigenvalues) {
        if (lambda < -1e-8) {
            throw NumericalFailure("input matrix is not positive semi-definite");
        }
    }
    for (double& lambda : eigenvalues) lambda = std::max(lambda, 0.0);

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return eigenvalues[x] > eigenvalues[y];
    });

    EigenDecomposition out;
    out.eigenvalues.resize(p);
    out.eigenvectors = Matrix(p, p);
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t src = order[col];
        out.eigenvalues[col] = eigenvalues[src];
        std::size_t arg = 0;
        for (std::size_t k = 1; k < p; ++k) {
            if (std::abs(v(k, src)) > std::abs(v(arg, src))) arg = k;
        }
        double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < p; ++k) out.eigenvectors(k, col) = sign * v(k, src);
    }
    return out;
}

double chi_square_p(double statistic, int dof) {
    if (dof < 1) throw ValidationError("chi_square_p requires dof >= 1");
    if (!std::isfinite(statistic)) {
        if (statistic > 0.0) return 0.0;
        throw ValidationError("chi_square_p requires a finite statistic");
    }
    if (statistic < 0.0) throw ValidationError("chi_square_p requires statistic >= 0");
    if (statistic == 0.0) return 1.0;
    return std::clamp(gamma_q(0.5 * static_cast<double>(dof), 0.5 * statistic), 0.0, 1.0);
}

std::optional<TestResult> chi_square_feature_test(const std::vector<double>& feature,
                                                  const std::vector<int>& y, int n_bins) {
    if (n_bins < 2) throw ValidationError("chi_square_feature_test requires n_bins >= 2");
    const std::size_t n = feature.size();
    if (n != y.size()) throw ValidationError("feature/target length mismatch");
    if (n < static_cast<std::size_t>(n_bins)) {
        throw ValidationError("need at least n_bins samples");
    }

    std::vector<double> sorted = feature;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) return std::nullopt;  // constant feature

    // Right-closed quantile bins: edge j is the last value of the j-th
    // quantile block, so ties pile below their edge. Duplicate edges collapse
    // and an edge at the maximum separates nothing, so it is dropped.
    std::vector<double> edges;
    for (int b = 1; b < n_bins; ++b) {
        std::size_t at = (n * static_cast<std::size_t>(b)) / static_cast<std::size_t>(n_bins);
        edges.push_back(sorted[at - 1]);
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    while (!edges.empty() && edges.back() == sorted.back()) edges.pop_back();
    if (edges.empty()) return std::nullopt;

    std::vector<int> classes = y;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    const std::size_t n_rows = edges.size() + 1;
    const std::size_t n_cols = classes.size();
    if (n_cols < 2) return std::nullopt;

    Matrix observed(n_rows, n_cols, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t row = static_cast<std::size_t>(
            std::lower_bound(edges.begin(), edges.end(), feature[i]) - edges.begin());
        std::size_t col = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
        observed(row, col) += 1.0;
    }

    std::vector<double> row_tot(n_rows, 0.0), col_tot(n_cols, 0.0);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            row_tot[r] += observed(r, c);
            col_tot[c] += observed(r, c);
        }
    }
    const std::size_t live_rows =
        static_cast<std::size_t>(std::count_if(row_tot.begin(), row_tot.end(),
                                               [](double t) { return t > 0.0; }));
    const std::size_t live_cols =
        static_cast<std::size_t>(std::count_if(col_tot.begin(), col_tot.end(),
                                               [](double t) { return t > 0.0; }));
    if (live_rows < 2 || live_cols < 2) return std::nullopt;

    double statistic = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            double expected = row_tot[r] * col_tot[c] / static_cast<double>(n);
            if (expected > 0.0) {
                double d = observed(r, c) - expected;
                statistic += d * d / expected;
            }
        }
    }
    int dof = static_cast<int>((live_rows - 1) * (live_cols - 1));
    return TestResult{statistic, chi_square_p(statistic, dof), dof};
}

TestResult bartlett_sphericity(const CorrelationMatrix& R, std::size_t n_samples) {
    const std::size_t p = R.dim();
    if (n_samples <= p) {
        throw ValidationError("bartlett_sphericity requires n_samples > p");
    }
    if (p < 2) {
        return TestResult{0.0, 1.0, 0};  // a 1x1 R is the identity
    }
    EigenDecomposition eig = eigen_sym(R);

    int dof = static_cast<int>(p * (p - 1) / 2);
    double log_det = 0.0;
    bool singular = false;
    for (double lambda : eig.eigenvalues) {
        if (lambda <= 1e-12) {
            singular = true;
            break;
        }
        log_det += std::log(lambda);
    }
    if (singular) {
        // Perfect multicollinearity: maximally non-spherical.
        return TestResult{std::numeric_limits<double>::infinity(), 0.0, dof};
    }
    double scale = static_cast<double>(n_samples) - 1.0 -
                   (2.0 * static_cast<double>(p) + 5.0) / 6.0;
    double statistic = std::max(0.0, -scale * log_det);
    return TestResult{statistic, chi_square_p(statistic, dof), dof};
}

std::optional<double> kmo(const CorrelationMatrix& R) {
    const std::size_t p = R.dim();
    EigenDecomposition eig = eigen_sym(R);
    if (eig.eigenvalues.back() <= 1e-10) return std::nullopt;  // singular

    // S = R^-1 from the spectral form E diag(1/lambda) E'.
    Matrix s(p, p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                acc += eig.eigenvectors(i, k) * eig.eigenvectors(j, k) / eig.eigenvalues[k];
            }
            s(i, j) = acc;
            s(j, i) = acc;
        }
    }

    double r2 = 0.0;
    double q2 = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j) continue;
            r2 += R(i, j) * R(i, j);
            double q = -s(i, j) / std::sqrt(s(i, i) * s(j, j));
            q2 += q * q;
        }
    }
    if (r2 + q2 == 0.0) return std::nullopt;  // identity R: 0/0
    return std::clamp(r2 / (r2 + q2), 0.0, 1.0);
}

}  // namespace loadrank
