#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "spinach/kb/ids.hpp"

namespace spinach::agent {

struct SearchWikidata {
    std::string query;
    bool operator==(const SearchWikidata&) const = default;
};
struct GetWikidataEntry {
    kb::EntityId id;
    bool operator==(const GetWikidataEntry&) const = default;
};
struct GetPropertyExamples {
    kb::PropertyId id;
    bool operator==(const GetPropertyExamples&) const = default;
};
struct ExecuteSparql {
    std::string query;
    bool operator==(const ExecuteSparql&) const = default;
};
struct Stop {
    bool operator==(const Stop&) const = default;
};

using Action = std::variant<SearchWikidata, GetWikidataEntry, GetPropertyExamples, ExecuteSparql, Stop>;

/// "search_wikidata", "get_wikidata_entry", ...
std::string_view action_name(const Action& action);

/// The argument as written between the parentheses (empty for stop).
std::string action_argument(const Action& action);

/// Builds an action from its name and argument text. Surrounding whitespace
/// is trimmed; ids accept an optional "wd:" prefix. Throws InvalidArgument for
/// unknown names, missing arguments, or a stray argument to stop.
Action make_action(std::string_view name, std::string_view argument);

/// Canonical text form, e.g. `search_wikidata("Euler")`, `stop()`.
std::string render_action(const Action& action);

/// Identity used for repetition detection: name plus argument, with SPARQL
/// whitespace collapsed.
std::string repetition_key(const Action& action);

} // namespace spinach::agent
