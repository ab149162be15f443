#ifndef LOADRANK_RATING_HPP
#define LOADRANK_RATING_HPP

#include <string>
#include <utility>
#include <vector>

namespace loadrank {

enum class MappingScheme { Detailed, Coarse };

/// Lookup table from S&P rating strings to integer categories. Two built-in
/// schemes: Detailed (21 notches, categories 1..21) and Coarse (the full
/// letter scale folded onto 10 grades, RD/SD/D sharing "In Default").
class RatingMapping {
public:
    static RatingMapping detailed();
    static RatingMapping coarse();
    static RatingMapping for_scheme(MappingScheme scheme);

    MappingScheme scheme() const { return scheme_; }

    /// Entries in table order, for reports and tests.
    const std::vector<std::pair<std::string, int>>& entries() const {
        return entries_;
    }

    int category_count() const { return category_count_; }

    /// Exact lookup after trimming surrounding whitespace; case-sensitive.
    /// Throws UnmappedRating for anything not in the table.
    int map(const std::string& rating) const;

private:
    RatingMapping(MappingScheme scheme, int category_count,
                  std::vector<std::pair<std::string, int>> entries);

    MappingScheme scheme_;
    int category_count_;
    std::vector<std::pair<std::string, int>> entries_;
};

int map_rating(const std::string& rating, const RatingMapping& mapping);

std::string trim(const std::string& text);

}  // namespace loadrank

#endif
