#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "spinach/common/error.hpp"

namespace spinach::stats {

/// Query outside the analyzer's grammar subset (CONSTRUCT, DESCRIBE, updates,
/// or malformed text). Carries the byte offset where analysis stopped.
class UnsupportedSyntax : public Error {
public:
    UnsupportedSyntax(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset)
    {
    }
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Structural complexity counts of one query.
///
/// `clauses` counts atomic syntax-tree nodes: every SELECT/ASK projection
/// (subqueries included), every subject-relation-object triple, and each
/// GROUP BY, HAVING, FILTER, BIND, ORDER BY, MINUS, OPTIONAL and UNION.
struct QueryStats {
    int clauses = 0;
    int projections = 0;
    int relations = 0;
    int subjects = 0;
    int predicates = 0;
    int objects = 0;
    int literals = 0;

    bool operator==(const QueryStats&) const = default;
};

inline constexpr std::array<std::string_view, 7> metric_names{"clauses",  "projections", "relations", "subjects",
                                                              "predicates", "objects",   "literals"};

QueryStats analyze_query(std::string_view query);

struct Exclusion {
    std::size_t index;
    std::string reason;
};

struct AggregateStats {
    /// Means in `metric_names` order over the analyzed queries.
    std::array<double, 7> means{};
    std::size_t analyzed = 0;
    std::vector<Exclusion> excluded;
};

/// Throws InvalidArgument when `queries` is empty.
AggregateStats aggregate_stats(const std::vector<std::string>& queries);

} // namespace spinach::stats
