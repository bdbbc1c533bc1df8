#pragma once

#include <nlohmann/json.hpp>

#include "spinach/kb/types.hpp"

// Structured (lossless) JSON encodings of the kb payload types, used by trace
// files and replay fixtures. These are not the human-readable observations.
namespace spinach::kb {

nlohmann::json encode(const SearchResult& v);
nlohmann::json encode(const EntityEntry& v);
nlohmann::json encode(const PropertyExamples& v);
nlohmann::json encode(const SparqlResponse& v);
nlohmann::json encode(const Datum& v);

SearchResult decode_search_result(const nlohmann::json& j);
EntityEntry decode_entity_entry(const nlohmann::json& j);
PropertyExamples decode_property_examples(const nlohmann::json& j);
SparqlResponse decode_sparql_response(const nlohmann::json& j);
Datum decode_datum(const nlohmann::json& j);

} // namespace spinach::kb
