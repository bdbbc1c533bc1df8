#include "spinach/kb/render.hpp"

#include <fmt/format.h>

namespace spinach::kb {

using nlohmann::ordered_json;

namespace {

std::string escape_cell(std::string s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n') {
            out += ' ';
        } else {
            out.push_back(c);
        }
    }
    return out;
}

void append_row(std::string& out, const std::vector<SparqlTerm>& row)
{
    out += '|';
    for (const auto& cell : row) {
        out += ' ';
        out += escape_cell(term_text(cell));
        out += " |";
    }
    out += '\n';
}

} // namespace

std::string term_text(const SparqlTerm& term)
{
    if (term.type == SparqlTerm::Type::uri) {
        if (auto id = id_from_uri(term.value)) {
            return *id;
        }
    }
    return term.value;
}

std::string datum_text(const Datum& d)
{
    switch (d.kind) {
    case ValueKind::entity:
        return fmt::format("{} ({})", d.label.empty() ? d.value : d.label, d.value);
    case ValueKind::quantity:
        return d.label.empty() ? d.value : fmt::format("{} {}", d.value, d.label);
    default:
        return d.value;
    }
}

std::string claim_key(const Claim& claim)
{
    return fmt::format("{} ({})", claim.property_label.empty() ? claim.property.str() : claim.property_label,
                       claim.property.str());
}

std::string entity_and_description(const EntityEntry& entry)
{
    if (entry.description.empty()) {
        return fmt::format("{} ({})", entry.label, entry.subject.str());
    }
    return fmt::format("{} ({}, {})", entry.label, entry.subject.str(), entry.description);
}

ordered_json entry_claims_json(const EntityEntry& entry)
{
    ordered_json claims = ordered_json::object();
    for (const auto& claim : entry.claims) {
        bool any_qualifiers = false;
        for (const auto& v : claim.values) {
            any_qualifiers = any_qualifiers || !v.qualifiers.empty();
        }
        ordered_json rendered;
        if (any_qualifiers) {
            rendered = ordered_json::object();
            for (const auto& v : claim.values) {
                ordered_json quals = ordered_json::array();
                for (const auto& q : v.qualifiers) {
                    quals.push_back(ordered_json{
                        {fmt::format("{} ({})", q.property_label.empty() ? q.property.str() : q.property_label,
                                     q.property.str()),
                         datum_text(q.value)}});
                }
                ordered_json body = ordered_json::object();
                if (!quals.empty()) {
                    body["Qualifiers"] = std::move(quals);
                }
                rendered[datum_text(v.datum)] = std::move(body);
            }
        } else if (claim.values.size() == 1) {
            rendered = datum_text(claim.values.front().datum);
        } else {
            rendered = ordered_json::array();
            for (const auto& v : claim.values) {
                rendered.push_back(datum_text(v.datum));
            }
        }
        claims[claim_key(claim)] = std::move(rendered);
    }
    return claims;
}

std::string render_observation(const SearchResult& result)
{
    std::string out;
    if (result.entities.empty() && result.properties.empty()) {
        return "No matching entities or properties found.";
    }
    std::size_t shown = 0;
    for (const auto& e : result.entities) {
        if (shown++ >= max_search_entities) {
            break;
        }
        out += fmt::format("{}: {}", e.id.str(), e.label);
        if (!e.description.empty()) {
            out += " - " + e.description;
        }
        out += '\n';
    }
    shown = 0;
    for (const auto& p : result.properties) {
        if (shown++ >= max_search_properties) {
            break;
        }
        out += fmt::format("{}: {}", p.id.str(), p.label);
        if (!p.description.empty()) {
            out += " - " + p.description;
        }
        out += '\n';
    }
    out.pop_back();
    return out;
}

std::string render_observation(const EntityEntry& entry)
{
    return fmt::format("Wikidata entry for {}:\n{}", entity_and_description(entry), entry_claims_json(entry).dump(2));
}

std::string render_observation(const PropertyExamples& examples)
{
    if (examples.empty()) {
        return "No usage examples found.";
    }
    std::string out;
    for (const auto& ex : examples) {
        out += fmt::format("{} ({}) -> {}\n", ex.subject_label.empty() ? ex.subject.str() : ex.subject_label,
                           ex.subject.str(), datum_text(ex.object));
    }
    out.pop_back();
    return out;
}

std::string render_observation(const SparqlResponse& response)
{
    if (response.is_boolean()) {
        return response.boolean() ? "true" : "false";
    }
    if (response.is_error()) {
        return fmt::format("Error ({}): {}", to_string(response.error().kind), response.error().message);
    }
    const auto& table = response.table();
    if (table.rows.empty()) {
        return "The query returned 0 rows.";
    }
    std::string out = "|";
    for (const auto& c : table.columns) {
        out += ' ' + c + " |";
    }
    out += "\n|";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += "---|";
    }
    out += '\n';
    const auto n = table.rows.size();
    if (n <= max_rendered_rows) {
        for (const auto& row : table.rows) {
            append_row(out, row);
        }
        out.pop_back();
        return out;
    }
    for (std::size_t i = 0; i < rendered_edge_rows; ++i) {
        append_row(out, table.rows[i]);
    }
    out += "...\n";
    for (std::size_t i = n - rendered_edge_rows; i < n; ++i) {
        append_row(out, table.rows[i]);
    }
    out += fmt::format("(showing the first {} and last {} of {} rows)", rendered_edge_rows, rendered_edge_rows, n);
    return out;
}

std::string render_observation(const ObservationPayload& payload)
{
    return std::visit([](const auto& p) { return render_observation(p); }, payload);
}

} // namespace spinach::kb
