#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spinach/kb/types.hpp"

namespace spinach::kb {

class EmptyQuery : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class UnknownEntity : public Error {
public:
    using Error::Error;
};

class UnknownProperty : public Error {
public:
    using Error::Error;
};

/// The four knowledge-base lookups the agent can perform, plus label
/// resolution for result normalization.
class KnowledgeBase {
public:
    virtual ~KnowledgeBase() = default;

    /// At most 8 entities and 4 properties, in service order. Throws EmptyQuery.
    virtual SearchResult search_items(std::string_view query) = 0;

    /// All outgoing claims with qualifiers. Throws UnknownEntity.
    virtual EntityEntry fetch_entity_entry(const EntityId& id) = 0;

    /// Up to five subject/object usage pairs. Throws UnknownProperty.
    virtual PropertyExamples fetch_property_examples(const PropertyId& id) = 0;

    /// Never throws for service-side failures; they come back as SparqlError.
    virtual SparqlResponse run_sparql(std::string_view query) = 0;

    /// English labels for Q/P ids; ids without a label map to themselves.
    virtual std::map<std::string, std::string> fetch_labels(const std::vector<std::string>& ids) = 0;
};

} // namespace spinach::kb
