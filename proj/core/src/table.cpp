#include "loadrank/table.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "loadrank/errors.hpp"

namespace loadrank {

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == delimiter) {
            out.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.push_back(cell);
    return out;
}

}  // namespace

RawTable parse_table(const std::string& text, char delimiter,
                     const std::string& origin) {
    RawTable table;
    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && stream.eof()) break;
        std::vector<std::string> cells = split_line(line, delimiter);
        if (line_no == 1) {
            std::unordered_set<std::string> seen;
            for (const std::string& name : cells) {
                if (!seen.insert(name).second) {
                    throw ParseError(origin + ": duplicate header \"" + name + "\"");
                }
            }
            table.column_names = std::move(cells);
            continue;
        }
        if (cells.size() != table.column_names.size()) {
            throw ParseError(origin + ": row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(table.column_names.size()));
        }
        table.cells.push_back(std::move(cells));
    }
    if (table.column_names.empty()) {
        throw ParseError(origin + ": missing header row");
    }
    return table;
}

RawTable load_table(const std::string& path, char delimiter) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open \"" + path + "\" for reading");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    if (file.bad()) {
        throw IoError("read failure on \"" + path + "\"");
    }
    return parse_table(buffer.str(), delimiter, path);
}

}  // namespace loadrank
