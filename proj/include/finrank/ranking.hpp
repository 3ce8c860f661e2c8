#pragma once

#include <string>
#include <utility>
#include <vector>

namespace finrank {

// One query unit: all images of one encounter of one individual.
struct QueryUnit {
    std::string individual;
    std::string encounter;

    friend bool operator==(const QueryUnit&, const QueryUnit&) = default;
    friend auto operator<=>(const QueryUnit&, const QueryUnit&) = default;
};

// Matcher output for one query: database individuals ordered best-first.
struct RankedList {
    QueryUnit query;
    std::vector<std::pair<std::string, double>> entries;  // (individual, score)
};

}  // namespace finrank
