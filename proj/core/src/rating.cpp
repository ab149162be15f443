#include "loadrank/rating.hpp"

#include "loadrank/errors.hpp"

namespace loadrank {

std::string trim(const std::string& text) {
    const char* ws = " \t\r\n\f\v";
    std::size_t begin = text.find_first_not_of(ws);
    if (begin == std::string::npos) return "";
    std::size_t end = text.find_last_not_of(ws);
    return text.substr(begin, end - begin + 1);
}

RatingMapping::RatingMapping(MappingScheme scheme, int category_count,
                             std::vector<std::pair<std::string, int>> entries)
    : scheme_(scheme), category_count_(category_count), entries_(std::move(entries)) {}

RatingMapping RatingMapping::detailed() {
    return RatingMapping(MappingScheme::Detailed, 21,
                         {
                             {"AAA", 1},  {"AA+", 2},   {"AA", 3},   {"AA-", 4},
                             {"A+", 5},   {"A", 6},     {"A-", 7},   {"BBB+", 8},
                             {"BBB", 9},  {"BBB-", 10}, {"BB+", 11}, {"BB-", 12},
                             {"B+", 13},  {"B", 14},    {"B-", 15},  {"CCC+", 16},
                             {"CCC", 17}, {"CCC-", 18}, {"CC", 19},  {"C", 20},
                             {"RD", 21},
                         });
}

RatingMapping RatingMapping::coarse() {
    return RatingMapping(MappingScheme::Coarse, 10,
                         {
                             {"AAA", 1},                                // Prime
                             {"AA+", 2},  {"AA", 2},   {"AA-", 2},     // High Grade
                             {"A+", 3},   {"A", 3},    {"A-", 3},      // Upper Medium Grade
                             {"BBB+", 4}, {"BBB", 4},  {"BBB-", 4},    // Lower Medium Grade
                             {"BB+", 5},  {"BB", 5},   {"BB-", 5},     // Non-Investment Grade
                             {"B+", 6},   {"B", 6},    {"B-", 6},      // Highly Speculative
                             {"CCC+", 7}, {"CCC", 7},  {"CCC-", 7},    // Substantial Risks
                             {"CC", 8},                                // Extremely Speculative
                             {"C", 9},                                 // Default Imminent
                             {"RD", 10},  {"SD", 10},  {"D", 10},      // In Default
                         });
}

RatingMapping RatingMapping::for_scheme(MappingScheme scheme) {
    return scheme == MappingScheme::Detailed ? detailed() : coarse();
}

int RatingMapping::map(const std::string& rating) const {
    std::string key = trim(rating);
    for (const auto& [name, category] : entries_) {
        if (name == key) return category;
    }
    throw UnmappedRating(key);
}

int map_rating(const std::string& rating, const RatingMapping& mapping) {
    return mapping.map(rating);
}

}  // namespace loadrank
