#ifndef LOADRANK_TABLE_HPP
#define LOADRANK_TABLE_HPP

#include <string>
#include <vector>

namespace loadrank {

/// Header row plus string cells, exactly as parsed. Every row has one cell
/// per column name and column names are unique.
struct RawTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> cells;

    std::size_t n_rows() const { return cells.size(); }
    std::size_t n_cols() const { return column_names.size(); }
};

/// Parses a delimited UTF-8 text file with one header row. Rejects ragged
/// rows and duplicate headers. Trailing '\r' is stripped so CRLF files load.
RawTable load_table(const std::string& path, char delimiter = ',');

/// Same parser over an in-memory buffer; load_table is a thin wrapper.
RawTable parse_table(const std::string& text, char delimiter,
                     const std::string& origin);

}  // namespace loadrank

#endif
