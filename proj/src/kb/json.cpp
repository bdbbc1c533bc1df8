#include "spinach/kb/json.hpp"

#include <array>

namespace spinach::kb {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ValueKind, std::string_view>, 6> value_kind_names{{
    {ValueKind::entity, "entity"},
    {ValueKind::literal, "literal"},
    {ValueKind::quantity, "quantity"},
    {ValueKind::time, "time"},
    {ValueKind::no_value, "novalue"},
    {ValueKind::some_value, "somevalue"},
}};

std::string kind_name(ValueKind k)
{
    for (auto [kind, name] : value_kind_names) {
        if (kind == k) {
            return std::string(name);
        }
    }
    return "literal";
}

ValueKind kind_from_name(const std::string& s)
{
    for (auto [kind, name] : value_kind_names) {
        if (name == s) {
            return kind;
        }
    }
    throw InvalidArgument("unknown value kind '" + s + "'");
}

constexpr std::array<std::pair<SparqlTerm::Type, std::string_view>, 4> term_type_names{{
    {SparqlTerm::Type::uri, "uri"},
    {SparqlTerm::Type::literal, "literal"},
    {SparqlTerm::Type::bnode, "bnode"},
    {SparqlTerm::Type::unbound, "unbound"},
}};

json encode_term(const SparqlTerm& t)
{
    json j = json::object();
    for (auto [type, name] : term_type_names) {
        if (type == t.type) {
            j["type"] = name;
        }
    }
    if (t.type != SparqlTerm::Type::unbound) {
        j["value"] = t.value;
    }
    if (!t.datatype.empty()) {
        j["datatype"] = t.datatype;
    }
    if (!t.lang.empty()) {
        j["xml:lang"] = t.lang;
    }
    return j;
}

SparqlTerm decode_term(const json& j)
{
    SparqlTerm t;
    auto type = j.value("type", std::string("unbound"));
    bool known = false;
    for (auto [tt, name] : term_type_names) {
        if (name == type) {
            t.type = tt;
            known = true;
        }
    }
    if (type == "typed-literal") {
        t.type = SparqlTerm::Type::literal;
        known = true;
    }
    if (!known) {
        throw InvalidArgument("unknown SPARQL term type '" + type + "'");
    }
    t.value = j.value("value", std::string());
    t.datatype = j.value("datatype", std::string());
    t.lang = j.value("xml:lang", std::string());
    return t;
}

SparqlErrorKind error_kind_from_name(const std::string& s)
{
    for (auto k : {SparqlErrorKind::syntax, SparqlErrorKind::timeout, SparqlErrorKind::network,
                   SparqlErrorKind::too_large}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw InvalidArgument("unknown SPARQL error kind '" + s + "'");
}

} // namespace

json encode(const Datum& v)
{
    json j{{"kind", kind_name(v.kind)}, {"value", v.value}};
    if (!v.label.empty()) {
        j["label"] = v.label;
    }
    return j;
}

Datum decode_datum(const json& j)
{
    return Datum{kind_from_name(j.at("kind").get<std::string>()), j.at("value").get<std::string>(),
                 j.value("label", std::string())};
}

json encode(const SearchResult& v)
{
    json entities = json::array();
    for (const auto& e : v.entities) {
        entities.push_back({{"id", e.id.str()}, {"label", e.label}, {"description", e.description}});
    }
    json properties = json::array();
    for (const auto& p : v.properties) {
        properties.push_back({{"id", p.id.str()}, {"label", p.label}, {"description", p.description}});
    }
    return {{"entities", entities}, {"properties", properties}};
}

SearchResult decode_search_result(const json& j)
{
    SearchResult r;
    for (const auto& e : j.at("entities")) {
        r.entities.push_back(LabeledEntity{EntityId(e.at("id").get<std::string>()), e.value("label", ""),
                                           e.value("description", "")});
    }
    for (const auto& p : j.at("properties")) {
        r.properties.push_back(LabeledProperty{PropertyId(p.at("id").get<std::string>()), p.value("label", ""),
                                               p.value("description", "")});
    }
    return r;
}

json encode(const EntityEntry& v)
{
    json claims = json::array();
    for (const auto& c : v.claims) {
        json values = json::array();
        for (const auto& cv : c.values) {
            json quals = json::array();
            for (const auto& q : cv.qualifiers) {
                quals.push_back({{"property", q.property.str()},
                                 {"property_label", q.property_label},
                                 {"value", encode(q.value)}});
            }
            values.push_back({{"value", encode(cv.datum)}, {"qualifiers", quals}});
        }
        claims.push_back({{"property", c.property.str()}, {"property_label", c.property_label}, {"values", values}});
    }
    return {{"subject", v.subject.str()}, {"label", v.label}, {"description", v.description}, {"claims", claims}};
}

EntityEntry decode_entity_entry(const json& j)
{
    EntityEntry e{EntityId(j.at("subject").get<std::string>()), j.value("label", ""), j.value("description", ""), {}};
    for (const auto& c : j.at("claims")) {
        Claim claim{PropertyId(c.at("property").get<std::string>()), c.value("property_label", ""), {}};
        for (const auto& cv : c.at("values")) {
            ClaimValue value{decode_datum(cv.at("value")), {}};
            for (const auto& q : cv.value("qualifiers", json::array())) {
                value.qualifiers.push_back(Qualifier{PropertyId(q.at("property").get<std::string>()),
                                                     q.value("property_label", ""), decode_datum(q.at("value"))});
            }
            claim.values.push_back(std::move(value));
        }
        e.claims.push_back(std::move(claim));
    }
    return e;
}

json encode(const PropertyExamples& v)
{
    json out = json::array();
    for (const auto& ex : v) {
        out.push_back({{"subject", ex.subject.str()}, {"subject_label", ex.subject_label}, {"object", encode(ex.object)}});
    }
    return out;
}

PropertyExamples decode_property_examples(const json& j)
{
    PropertyExamples out;
    for (const auto& ex : j) {
        out.push_back(PropertyExample{EntityId(ex.at("subject").get<std::string>()), ex.value("subject_label", ""),
                                      decode_datum(ex.at("object"))});
    }
    return out;
}

json encode(const SparqlResponse& v)
{
    if (v.is_boolean()) {
        return {{"boolean", v.boolean()}};
    }
    if (v.is_error()) {
        return {{"error", {{"kind", to_string(v.error().kind)}, {"message", v.error().message}}}};
    }
    const auto& t = v.table();
    json rows = json::array();
    for (const auto& row : t.rows) {
        json r = json::array();
        for (const auto& cell : row) {
            r.push_back(encode_term(cell));
        }
        rows.push_back(std::move(r));
    }
    return {{"columns", t.columns}, {"rows", rows}};
}

SparqlResponse decode_sparql_response(const json& j)
{
    if (j.contains("boolean")) {
        return SparqlResponse(j.at("boolean").get<bool>());
    }
    if (j.contains("error")) {
        const auto& e = j.at("error");
        return SparqlResponse(SparqlError{error_kind_from_name(e.at("kind").get<std::string>()),
                                          e.value("message", std::string())});
    }
    SparqlTable t;
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
        std::vector<SparqlTerm> cells;
        for (const auto& cell : row) {
            cells.push_back(decode_term(cell));
        }
        t.rows.push_back(std::move(cells));
    }
    return SparqlResponse(std::move(t));
}

} // namespace spinach::kb
