#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinach/kb/ids.hpp"

namespace spinach::kb {

inline constexpr std::size_t max_search_entities = 8;
inline constexpr std::size_t max_search_properties = 4;
inline constexpr std::size_t property_example_count = 5;

struct LabeledEntity {
    EntityId id;
    std::string label;
    std::string description;
    bool operator==(const LabeledEntity&) const = default;
};

struct LabeledProperty {
    PropertyId id;
    std::string label;
    std::string description;
    bool operator==(const LabeledProperty&) const = default;
};

struct SearchResult {
    std::vector<LabeledEntity> entities;
    std::vector<LabeledProperty> properties;
    bool operator==(const SearchResult&) const = default;
};

enum class ValueKind { entity, literal, quantity, time, no_value, some_value };

/// A claim or qualifier value. `label` is only meaningful for entity values.
struct Datum {
    ValueKind kind = ValueKind::literal;
    std::string value;
    std::string label;
    bool operator==(const Datum&) const = default;
};

struct Qualifier {
    PropertyId property;
    std::string property_label;
    Datum value;
    bool operator==(const Qualifier&) const = default;
};

struct ClaimValue {
    Datum datum;
    std::vector<Qualifier> qualifiers;
    bool operator==(const ClaimValue&) const = default;
};

/// All statements of one property on the subject, in service order.
struct Claim {
    PropertyId property;
    std::string property_label;
    std::vector<ClaimValue> values;
    bool operator==(const Claim&) const = default;
};

struct EntityEntry {
    EntityId subject;
    std::string label;
    std::string description;
    std::vector<Claim> claims;
    bool operator==(const EntityEntry&) const = default;
};

struct PropertyExample {
    EntityId subject;
    std::string subject_label;
    Datum object;
    bool operator==(const PropertyExample&) const = default;
};

using PropertyExamples = std::vector<PropertyExample>;

struct SparqlTerm {
    enum class Type { uri, literal, bnode, unbound };
    Type type = Type::unbound;
    std::string value;
    std::string datatype;
    std::string lang;
    bool operator==(const SparqlTerm&) const = default;
};

struct SparqlTable {
    std::vector<std::string> columns;
    std::vector<std::vector<SparqlTerm>> rows;
    bool operator==(const SparqlTable&) const = default;
};

enum class SparqlErrorKind { syntax, timeout, network, too_large };

struct SparqlError {
    SparqlErrorKind kind = SparqlErrorKind::network;
    std::string message;
    bool operator==(const SparqlError&) const = default;
};

std::string_view to_string(SparqlErrorKind kind);

/// Outcome of one query execution: a table (SELECT), a boolean (ASK) or an error.
class SparqlResponse {
public:
    using Value = std::variant<SparqlTable, bool, SparqlError>;

    SparqlResponse() : value_(SparqlTable{}) {}
    SparqlResponse(SparqlTable table);
    SparqlResponse(bool answer) : value_(answer) {}
    SparqlResponse(SparqlError error) : value_(std::move(error)) {}

    bool is_table() const { return std::holds_alternative<SparqlTable>(value_); }
    bool is_boolean() const { return std::holds_alternative<bool>(value_); }
    bool is_error() const { return std::holds_alternative<SparqlError>(value_); }

    const SparqlTable& table() const { return std::get<SparqlTable>(value_); }
    bool boolean() const { return std::get<bool>(value_); }
    const SparqlError& error() const { return std::get<SparqlError>(value_); }
    const Value& value() const { return value_; }

    /// A boolean, or a table with at least one row.
    bool has_answer() const;

    bool operator==(const SparqlResponse&) const = default;

private:
    Value value_;
};

struct ClientConfig {
    std::string sparql_endpoint_url = "https://query.wikidata.org/sparql";
    std::string api_endpoint_url = "https://www.wikidata.org/w/api.php";
    std::chrono::milliseconds request_timeout{60'000};
    std::string user_agent = "spinach-kbqa/0.1 (https://github.com/spinach-kbqa; knowledge-base QA research client)";
    int max_retries = 3;
    std::optional<std::filesystem::path> cache_dir;
    std::chrono::milliseconds min_request_interval{100};
    std::chrono::milliseconds retry_backoff{500};
    std::size_t max_response_bytes = 10u * 1024u * 1024u;
    bool use_cache = true;
    /// Serve only from cache; a miss is a NetworkError.
    bool offline = false;

    /// Throws InvalidArgument when an invariant is violated.
    void validate() const;

    /// Applies SPINACH_SPARQL_ENDPOINT / SPINACH_API_ENDPOINT / SPINACH_CACHE_DIR when set.
    ClientConfig with_env_overrides() const;
};

} // namespace spinach::kb
