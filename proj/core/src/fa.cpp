#include "loadrank/fa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loadrank/errors.hpp"

namespace loadrank {

namespace {

double varimax_criterion(const Matrix& a) {
    const double p = static_cast<double>(a.rows());
    double v = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double sum2 = 0.0;
        double sum4 = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double sq = a(i, j) * a(i, j);
            sum2 += sq;
            sum4 += sq * sq;
        }
        v += sum4 / p - (sum2 / p) * (sum2 / p);
    }
    return v;
}

void fix_column_signs(Matrix& a) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < a.rows(); ++i) {
            if (std::abs(a(i, j)) > std::abs(a(arg, j))) arg = i;
        }
        if (a(arg, j) < 0.0) {
            for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) = -a(i, j);
        }
    }
}

}  // namespace

FaGate fa_gate(const CorrelationMatrix& R, std::size_t n_samples,
               double kmo_minimum, double bartlett_alpha) {
    FaGate gate;
    gate.kmo_value = kmo(R);
    gate.bartlett = bartlett_sphericity(R, n_samples);
    gate.passed = gate.kmo_value.has_value() && *gate.kmo_value >= kmo_minimum &&
                  gate.bartlett.p_value < bartlett_alpha;
    return gate;
}

Matrix extract_factors(const EigenDecomposition& eig, double variance_threshold) {
    ComponentSelection sel = select_components(eig.eigenvalues, variance_threshold);
    const std::size_t p = eig.eigenvalues.size();
    Matrix loadings(p, sel.count);
    for (std::size_t j = 0; j < sel.count; ++j) {
        double root = std::sqrt(eig.eigenvalues[j]);
        for (std::size_t i = 0; i < p; ++i) {
            loadings(i, j) = root * eig.eigenvectors(i, j);
        }
    }
    return loadings;
}

VarimaxResult varimax(const Matrix& loadings, double tol, int max_sweeps) {
    const std::size_t p = loadings.rows();
    const std::size_t m = loadings.cols();
    if (m < 1) throw ValidationError("varimax needs at least one factor");

    VarimaxResult result;
    result.loadings = loadings;
    result.criterion = varimax_criterion(loadings);
    if (m == 1) return result;

    Matrix& a = result.loadings;
    double v_prev = result.criterion;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (std::size_t j = 0; j + 1 < m; ++j) {
            for (std::size_t k = j + 1; k < m; ++k) {
                // Kaiser's pairwise angle for the raw criterion.
                double big_a = 0.0, big_b = 0.0, big_c = 0.0, big_d = 0.0;
                for (std::size_t i = 0; i < p; ++i) {
                    double u = a(i, j) * a(i, j) - a(i, k) * a(i, k);
                    double w = 2.0 * a(i, j) * a(i, k);
                    big_a += u;
                    big_b += w;
                    big_c += u * u - w * w;
                    big_d += 2.0 * u * w;
                }
                double pn = static_cast<double>(p);
                double num = big_d - 2.0 * big_a * big_b / pn;
                double den = big_c - (big_a * big_a - big_b * big_b) / pn;
                if (num == 0.0 && den == 0.0) continue;
                double phi = 0.25 * std::atan2(num, den);
                if (std::abs(phi) < 1e-14) continue;
                double c = std::cos(phi);
                double s = std::sin(phi);
                for (std::size_t i = 0; i < p; ++i) {
                    double aj = a(i, j);
                    double ak = a(i, k);
                    a(i, j) = c * aj + s * ak;
                    a(i, k) = -s * aj + c * ak;
                }
            }
        }
        double v_now = varimax_criterion(a);
        if (v_now + 1e-12 < v_prev) {
            throw NumericalFailure("varimax criterion decreased across a sweep");
        }
        result.sweeps = sweep;
        result.criterion = v_now;
        double scale = std::max(std::abs(v_prev), 1e-30);
        if ((v_now - v_prev) / scale < tol) {
            result.converged = true;
            break;
        }
        v_prev = v_now;
        result.converged = sweep < max_sweeps;
    }

    fix_column_signs(a);

    std::vector<double> ss(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < p; ++i) ss[j] += a(i, j) * a(i, j);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return ss[x] > ss[y]; });
    Matrix reordered(p, m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < p; ++i) reordered(i, j) = a(i, order[j]);
    }
    result.loadings = std::move(reordered);
    return result;
}

std::vector<FactorAssignment> assign_features(const Matrix& rotated, double threshold) {
    std::vector<FactorAssignment> out;
    for (std::size_t i = 0; i < rotated.rows(); ++i) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < rotated.cols(); ++j) {
            if (std::abs(rotated(i, j)) > std::abs(rotated(i, arg))) arg = j;
        }
        double loading = rotated(i, arg);
        if (std::abs(loading) >= threshold) {
            out.push_back(FactorAssignment{i, arg + 1, loading});
        }
    }
    return out;
}

FeatureRanking fa_priority_rank(const std::vector<FactorAssignment>& assignments,
                                std::size_t m,
                                const std::vector<std::string>& feature_names) {
    struct Entry {
        std::size_t feature;
        std::size_t factor;
        double score;
    };
    std::vector<Entry> entries;
    double max_abs_loading = 0.0;
    for (const FactorAssignment& fa : assignments) {
        if (fa.factor < 1 || fa.factor > m) {
            throw ValidationError("factor index " + std::to_string(fa.factor) +
                                  " outside 1.." + std::to_string(m));
        }
        if (fa.feature >= feature_names.size()) {
            throw ValidationError("assignment feature index out of range");
        }
        double score = std::abs(fa.loading) +
                       static_cast<double>(m - fa.factor + 1);
        max_abs_loading = std::max(max_abs_loading, std::abs(fa.loading));
        entries.push_back({fa.feature, fa.factor, score});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.feature < b.feature;
    });

    // With |loading| <= 1 the score ranges of consecutive factors cannot
    // overlap, so the ranking must come out factor-block ordered.
    if (max_abs_loading <= 1.0 + 1e-9) {
        for (std::size_t i = 1; i < entries.size(); ++i) {
            if (entries[i].factor < entries[i - 1].factor) {
                throw NumericalFailure("factor priority ranking lost block order");
            }
        }
    }

    FeatureRanking out;
    out.method = RankMethod::FaPriority;
    for (const Entry& e : entries) {
        out.indices.push_back(e.feature);
        out.scores.push_back(e.score);
        out.feature_names.push_back(feature_names[e.feature]);
    }
    return out;
}

FactorModel fit_factor_model(const CorrelationMatrix& R, std::size_t n_samples,
                             double variance_threshold, double loading_threshold) {
    FactorModel model;
    model.gate = fa_gate(R, n_samples);
    if (!model.gate.passed) return model;

    EigenDecomposition eig = eigen_sym(R);
    model.unrotated_loadings = extract_factors(eig, variance_threshold);
    model.m = model.unrotated_loadings.cols();

    VarimaxResult rotation = varimax(model.unrotated_loadings);
    model.rotated_loadings = rotation.loadings;
    model.rotation_converged = rotation.converged;

    // Orthogonal rotation must preserve per-feature communality.
    for (std::size_t i = 0; i < model.unrotated_loadings.rows(); ++i) {
        double before = 0.0;
        double after = 0.0;
        for (std::size_t j = 0; j < model.m; ++j) {
            before += model.unrotated_loadings(i, j) * model.unrotated_loadings(i, j);
            after += model.rotated_loadings(i, j) * model.rotated_loadings(i, j);
        }
        if (std::abs(before - after) > 1e-8) {
            throw NumericalFailure("varimax rotation changed a communality");
        }
    }

    model.assignments = assign_features(model.rotated_loadings, loading_threshold);
    return model;
}

}  // namespace loadrank
