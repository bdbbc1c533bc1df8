#pragma once

#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "spinach/kb/types.hpp"

namespace spinach::kb {

/// Tables longer than this are shown as head + tail.
inline constexpr std::size_t max_rendered_rows = 10;
inline constexpr std::size_t rendered_edge_rows = 5;

using ObservationPayload = std::variant<SearchResult, EntityEntry, PropertyExamples, SparqlResponse>;

std::string render_observation(const SearchResult& result);
std::string render_observation(const EntityEntry& entry);
std::string render_observation(const PropertyExamples& examples);
std::string render_observation(const SparqlResponse& response);
std::string render_observation(const ObservationPayload& payload);

/// `"property label (P123)"`, the key style used for entity entries.
std::string claim_key(const Claim& claim);

/// `"label (Q123)"` for entities, the plain value otherwise.
std::string datum_text(const Datum& d);

/// The claims of an entry as an ordered JSON object (the body of the rendering).
nlohmann::ordered_json entry_claims_json(const EntityEntry& entry);

/// `"Label (Q123, description)"` header used for entries.
std::string entity_and_description(const EntityEntry& entry);

/// Short cell text: Wikidata entity URIs become their ids.
std::string term_text(const SparqlTerm& term);

} // namespace spinach::kb
