// Independent reference computations for the test suite. Nothing here may
// call the implementation path it is used to check.

#ifndef LOADRANK_TESTS_ORACLES_HPP
#define LOADRANK_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "loadrank/matrix.hpp"
#include "loadrank/rng.hpp"

namespace oracles {

/// Upper-tail chi-square probability by Simpson quadrature of the density
/// under the substitution x = t^2, which removes the dof=1 singularity:
///   P(X > s) = 1 - int_0^sqrt(s) 2 t^(dof-1) exp(-t^2/2) / (2^(dof/2) G(dof/2)) dt.
inline double chi2_upper_tail(double statistic, int dof, int intervals = 200000) {
    if (statistic <= 0.0) return 1.0;
    const double a = 0.5 * static_cast<double>(dof);
    const double log_norm = a * std::log(2.0) + std::lgamma(a);
    auto integrand = [&](double t) {
        if (t <= 0.0) return dof == 1 ? 2.0 * std::exp(-log_norm) : 0.0;
        double log_f = static_cast<double>(dof - 1) * std::log(t) - 0.5 * t * t;
        return 2.0 * std::exp(log_f - log_norm);
    };
    const double upper = std::sqrt(statistic);
    const double h = upper / intervals;
    double sum = 0.0;
    for (int i = 0; i < intervals; ++i) {
        double left = i * h;
        sum += (integrand(left) + 4.0 * integrand(left + 0.5 * h) +
                integrand(left + h)) * h / 6.0;
    }
    return 1.0 - sum;
}

/// Pearson correlation straight from the definition on raw (unstandardized)
/// columns, population convention.
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

/// Random correlation matrix: Gram matrix of random Gaussian data, rescaled
/// to unit diagonal. Valid (PSD, symmetric, unit diagonal) by construction.
inline loadrank::Matrix random_correlation(std::size_t p, std::uint64_t seed,
                                           std::size_t n_rows = 0) {
    using loadrank::Matrix;
    loadrank::GaussianGen gauss{loadrank::Pcg32(seed)};
    std::size_t n = n_rows == 0 ? 3 * p + 10 : n_rows;
    Matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) x(i, j) = gauss.next();
    }
    Matrix gram(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += x(i, a) * x(i, b);
            gram(a, b) = dot;
            gram(b, a) = dot;
        }
    }
    Matrix r(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
            r(a, b) = gram(a, b) / std::sqrt(gram(a, a) * gram(b, b));
        }
    }
    for (std::size_t a = 0; a < p; ++a) r(a, a) = 1.0;
    return r;
}

/// Equicorrelation matrix: off-diagonal entries all r.
inline loadrank::Matrix equicorrelation(std::size_t p, double r) {
    loadrank::Matrix m(p, p, r);
    for (std::size_t i = 0; i < p; ++i) m(i, i) = 1.0;
    return m;
}

/// KMO of an equicorrelation matrix from the closed-form inverse
/// (a I + b J): a = 1/(1-r), b = -r / ((1-r)(1+(p-1)r)).
inline double kmo_equicorrelation(std::size_t p, double r) {
    double a = 1.0 / (1.0 - r);
    double b = -r / ((1.0 - r) * (1.0 + (static_cast<double>(p) - 1.0) * r));
    double s_diag = a + b;
    double q = -b / s_diag;
    double pairs = static_cast<double>(p) * (static_cast<double>(p) - 1.0);
    double r2 = pairs * r * r;
    double q2 = pairs * q * q;
    return r2 / (r2 + q2);
}

/// Applies a planar rotation by `angle` to factor columns (j, k).
inline loadrank::Matrix rotate_pair(const loadrank::Matrix& loadings, std::size_t j,
                                    std::size_t k, double angle) {
    loadrank::Matrix out = loadings;
    double c = std::cos(angle);
    double s = std::sin(angle);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double aj = loadings(i, j);
        double ak = loadings(i, k);
        out(i, j) = c * aj + s * ak;
        out(i, k) = -s * aj + c * ak;
    }
    return out;
}

}  // namespace oracles

#endif
