#include "loadrank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "loadrank/errors.hpp"
#include "loadrank/rng.hpp"

namespace loadrank {

namespace {

bool parse_double(const std::string& cell, double& out) {
    std::string text = trim(cell);
    if (text.empty()) return false;
    const char* begin = text.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + text.size() && std::isfinite(out);
}

void validate_dataset(const Dataset& ds) {
    if (ds.n_samples() < 2) throw ValidationError("dataset needs at least 2 samples");
    if (ds.n_features() < 2) throw ValidationError("dataset needs at least 2 feature columns");
    if (ds.y.size() != ds.n_samples()) throw ValidationError("target length mismatch");
    for (double v : ds.X.data()) {
        if (!std::isfinite(v)) throw ValidationError("non-finite value in feature matrix");
    }
}

}  // namespace

Dataset Dataset::select_features(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.y = y;
    out.X = Matrix(n_samples(), indices.size());
    out.feature_names.reserve(indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        out.feature_names.push_back(feature_names.at(indices[j]));
        for (std::size_t i = 0; i < n_samples(); ++i) {
            out.X(i, j) = X(i, indices[j]);
        }
    }
    return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.X = Matrix(indices.size(), n_features());
    out.y.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.y.push_back(y.at(indices[i]));
        for (std::size_t j = 0; j < n_features(); ++j) {
            out.X(i, j) = X(indices[i], j);
        }
    }
    return out;
}

Dataset build_dataset(const RawTable& table, const std::string& target_column,
                      const RatingMapping& mapping, MissingPolicy policy) {
    std::size_t target_idx = table.n_cols();
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
        if (table.column_names[j] == target_column) {
            target_idx = j;
            break;
        }
    }
    if (target_idx == table.n_cols()) {
        throw MissingTarget("target column \"" + target_column + "\" not found");
    }

    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
        if (j != target_idx) feature_cols.push_back(j);
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
        const auto& cells = table.cells[i];
        std::vector<double> row(feature_cols.size());
        bool missing = false;
        std::size_t bad_col = 0;
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            if (!parse_double(cells[feature_cols[j]], row[j])) {
                missing = true;
                bad_col = feature_cols[j];
                break;
            }
        }
        if (!missing && trim(cells[target_idx]).empty()) {
            missing = true;
            bad_col = target_idx;
        }
        if (missing) {
            if (policy == MissingPolicy::Fail) {
                throw ParseError("row " + std::to_string(i + 2) + ", column \"" +
                                 table.column_names[bad_col] +
                                 "\": missing or non-numeric cell");
            }
            continue;
        }
        y.push_back(mapping.map(cells[target_idx]));
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw DegenerateData("no rows left after applying missing-value policy");

    Dataset ds;
    for (std::size_t j : feature_cols) ds.feature_names.push_back(table.column_names[j]);
    ds.X = Matrix(rows.size(), feature_cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            ds.X(i, j) = rows[i][j];
        }
    }
    ds.y = std::move(y);
    validate_dataset(ds);
    return ds;
}

std::pair<Dataset, Standardization> standardize(const Dataset& dataset) {
    const std::size_t n = dataset.n_samples();
    const std::size_t p = dataset.n_features();

    Standardization scale;
    scale.columns.resize(p);
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += dataset.X(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = dataset.X(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        double std_dev = std::sqrt(var);

        ColumnScale& col = scale.columns[j];
        col.feature = dataset.feature_names[j];
        col.mean = mean;
        col.std = std_dev;
        // A column whose spread is at rounding level relative to its mean is
        // constant for our purposes; dividing by its "std" would only amplify
        // representation noise.
        col.dropped = std_dev <= 1e-12 * std::max(1.0, std::abs(mean));
        if (!col.dropped) kept.push_back(j);
    }

    if (kept.empty()) throw DegenerateData("every feature column has zero variance");

    Dataset out;
    out.y = dataset.y;
    out.X = Matrix(n, kept.size());
    for (std::size_t jj = 0; jj < kept.size(); ++jj) {
        std::size_t j = kept[jj];
        out.feature_names.push_back(dataset.feature_names[j]);
        const ColumnScale& col = scale.columns[j];
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.X(i, jj) = (dataset.X(i, j) - col.mean) / col.std;
            residual += out.X(i, jj);
        }
        // Second centering pass removes the rounding residual of the first.
        residual /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out.X(i, jj) -= residual;
    }
    return {std::move(out), std::move(scale)};
}

Dataset destandardize(const Dataset& dataset, const Standardization& scale) {
    Dataset out = dataset;
    std::size_t jj = 0;
    for (const ColumnScale& col : scale.columns) {
        if (col.dropped) continue;
        if (jj >= out.n_features() || col.feature != out.feature_names[jj]) {
            throw ValidationError("standardization record does not match dataset columns");
        }
        for (std::size_t i = 0; i < out.n_samples(); ++i) {
            out.X(i, jj) = out.X(i, jj) * col.std + col.mean;
        }
        ++jj;
    }
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ValidationError("test_fraction must be in (0, 1)");
    }

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
        by_class[dataset.y[i]].push_back(i);
    }
    for (const auto& [cls, members] : by_class) {
        if (members.size() < 2) {
            throw StratificationError("class " + std::to_string(cls) +
                                      " has a single sample; cannot stratify");
        }
    }

    const double n = static_cast<double>(dataset.n_samples());
    const long long total_test = std::llround(test_fraction * n);
    if (total_test < 1) throw ValidationError("test_fraction yields an empty test set");

    // Largest-remainder quotas: floor the exact per-class share, then hand the
    // remaining units to the largest fractional parts (ties to the smaller
    // class value). Keeps the overall test count at round(fraction * n).
    struct Quota {
        int cls;
        std::size_t size;
        long long take;
        double frac;
    };
    std::vector<Quota> quotas;
    long long assigned = 0;
    for (const auto& [cls, members] : by_class) {
        double exact = test_fraction * static_cast<double>(members.size());
        long long base = static_cast<long long>(std::floor(exact));
        base = std::min<long long>(base, static_cast<long long>(members.size()) - 1);
        quotas.push_back({cls, members.size(), base, exact - std::floor(exact)});
        assigned += base;
    }
    long long remainder = total_test - assigned;
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (quotas[a].frac != quotas[b].frac) return quotas[a].frac > quotas[b].frac;
        return quotas[a].cls < quotas[b].cls;
    });
    for (std::size_t round = 0; remainder > 0; ++round) {
        bool progressed = false;
        for (std::size_t idx : order) {
            if (remainder == 0) break;
            Quota& q = quotas[idx];
            if (q.take + 1 <= static_cast<long long>(q.size) - 1) {
                ++q.take;
                --remainder;
                progressed = true;
            }
        }
        if (!progressed) break;  // every class capped at size-1
    }

    std::vector<std::size_t> test_rows;
    std::vector<std::size_t> train_rows;
    for (const Quota& q : quotas) {
        std::vector<std::size_t> members = by_class[q.cls];
        Pcg32 rng(derive_seed(seed, {0x53504c4954ULL /* "SPLIT" */,
                                     static_cast<std::uint64_t>(q.cls)}));
        shuffle_inplace(members, rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (static_cast<long long>(i) < q.take) {
                test_rows.push_back(members[i]);
            } else {
                train_rows.push_back(members[i]);
            }
        }
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return {dataset.select_rows(train_rows), dataset.select_rows(test_rows)};
}

}  // namespace loadrank
