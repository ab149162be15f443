#ifndef LOADRANK_DATASET_HPP
#define LOADRANK_DATASET_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "loadrank/matrix.hpp"
#include "loadrank/rating.hpp"
#include "loadrank/table.hpp"

namespace loadrank {

/// Numeric feature matrix plus mapped integer categories. All values are
/// finite and n >= 2, p >= 2 hold after construction.
struct Dataset {
    std::vector<std::string> feature_names;
    Matrix X;  // n_samples x p
    std::vector<int> y;

    std::size_t n_samples() const { return X.rows(); }
    std::size_t n_features() const { return X.cols(); }

    /// New dataset holding the given columns, in the given order.
    Dataset select_features(const std::vector<std::size_t>& indices) const;
    /// New dataset holding the given rows, in the given order.
    Dataset select_rows(const std::vector<std::size_t>& indices) const;
};

enum class MissingPolicy { DropRow, Fail };

/// Per-column standardization record. Columns with zero population variance
/// are dropped rather than divided by zero; `dropped` marks them.
struct ColumnScale {
    std::string feature;
    double mean = 0.0;
    double std = 0.0;
    bool dropped = false;
};

struct Standardization {
    std::vector<ColumnScale> columns;  // one per input column, table order

    std::size_t dropped_count() const {
        std::size_t n = 0;
        for (const auto& c : columns) n += c.dropped ? 1 : 0;
        return n;
    }
};

/// Numeric parse of every non-target column; the target column is mapped
/// through `mapping`. Blank or unparseable cells follow `policy`: DropRow
/// discards the row, Fail raises ParseError naming row and column. Row
/// order is preserved among kept rows.
Dataset build_dataset(const RawTable& table, const std::string& target_column,
                      const RatingMapping& mapping, MissingPolicy policy);

/// Centers and scales each column to mean 0, population standard deviation 1
/// (both within 1e-10). Zero-variance columns are dropped and recorded.
/// Throws DegenerateData when nothing survives.
std::pair<Dataset, Standardization> standardize(const Dataset& dataset);

/// Inverse of standardize over the retained columns; testing aid.
Dataset destandardize(const Dataset& dataset, const Standardization& scale);

/// Deterministic stratified holdout. Per class the test quota is the exact
/// fraction rounded by largest remainder, so totals match
/// round(test_fraction * n). Classes with one sample raise
/// StratificationError.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double test_fraction,
                                  std::uint64_t seed);

}  // namespace loadrank

#endif
