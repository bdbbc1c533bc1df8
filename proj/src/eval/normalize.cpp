#include "spinach/eval/normalize.hpp"

#include <cstdlib>
#include <regex>
#include <set>

#include "spinach/common/text.hpp"

namespace spinach::eval {

namespace {

constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
constexpr std::string_view entity_prefix = "http://www.wikidata.org/entity/";

bool is_numeric_type(std::string_view t)
{
    static const std::set<std::string_view> numeric{"integer",         "decimal",           "double",
                                                     "float",           "int",               "long",
                                                     "short",           "byte",              "nonNegativeInteger",
                                                     "positiveInteger", "negativeInteger",   "nonPositiveInteger",
                                                     "unsignedInt",     "unsignedLong",      "unsignedShort",
                                                     "unsignedByte"};
    return numeric.count(t) != 0;
}

std::optional<ResultCell> parse_date(std::string_view type, const std::string& value)
{
    static const std::regex date_re(R"(^([+-]?\d{1,})(?:-(\d{2})(?:-(\d{2})(?:T(\d{2}):(\d{2}):(\d{2})(?:\.\d+)?)?)?)?(Z|[+-]\d{2}:\d{2})?$)");
    std::smatch m;
    if (!std::regex_match(value, m, date_re)) {
        return std::nullopt;
    }
    auto year = std::strtoll(m[1].str().c_str(), nullptr, 10);
    int month = m[2].matched ? std::stoi(m[2]) : 1;
    int day = m[3].matched ? std::stoi(m[3]) : 1;
    if (type == "gYear") {
        return ResultCell::date(year, 1, 1, DatePrecision::year);
    }
    if (type == "gYearMonth") {
        return ResultCell::date(year, month, 1, DatePrecision::month);
    }
    if (!m[4].matched) {
        return ResultCell::date(year, month, day, DatePrecision::day);
    }
    int h = std::stoi(m[4]);
    int mi = std::stoi(m[5]);
    int s = std::stoi(m[6]);
    if (h == 0 && mi == 0 && s == 0) {
        return ResultCell::date(year, month, day, DatePrecision::day);
    }
    return ResultCell::date(year, month, day, DatePrecision::second, h, mi, s);
}

} // namespace

ResultCell normalize_term(const kb::SparqlTerm& term, NormalizeMode mode)
{
    const bool fold = mode == NormalizeMode::label;
    switch (term.type) {
    case kb::SparqlTerm::Type::unbound:
        return ResultCell::unbound();
    case kb::SparqlTerm::Type::bnode:
        return ResultCell::literal("_:" + term.value);
    case kb::SparqlTerm::Type::uri: {
        std::string_view v = term.value;
        auto under_entity = v.substr(0, entity_prefix.size()) == entity_prefix;
        if (auto id = kb::id_from_uri(v)) {
            return ResultCell::entity(*id);
        }
        if (under_entity && v.substr(entity_prefix.size(), 10) != "statement/") {
            throw UnresolvableBinding("malformed entity URI: " + term.value);
        }
        return ResultCell::literal(term.value);
    }
    case kb::SparqlTerm::Type::literal:
        break;
    }
    std::string_view dt = term.datatype;
    if (dt.substr(0, xsd.size()) == xsd) {
        auto type = dt.substr(xsd.size());
        if (is_numeric_type(type)) {
            char* end = nullptr;
            auto value = std::strtold(term.value.c_str(), &end);
            if (end != term.value.c_str() && *end == '\0') {
                return ResultCell::number(value);
            }
        } else if (type == "dateTime" || type == "date" || type == "gYear" || type == "gYearMonth") {
            if (auto d = parse_date(type, term.value)) {
                return *d;
            }
        } else if (type == "boolean") {
            return ResultCell::boolean(term.value == "true" || term.value == "1");
        }
    }
    return ResultCell::literal(term.value, fold);
}

ResultTable normalize_results(const kb::SparqlResponse& raw, NormalizeMode mode, const LabelResolver& labels)
{
    if (raw.is_error()) {
        throw InvalidArgument("cannot normalize an error response: " + raw.error().message);
    }
    if (raw.is_boolean()) {
        return ResultTable::from_boolean(raw.boolean());
    }
    const auto& table = raw.table();
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Row cells;
        cells.reserve(row.size());
        for (const auto& term : row) {
            cells.push_back(normalize_term(term, mode));
        }
        rows.push_back(std::move(cells));
    }
    if (mode == NormalizeMode::label) {
        std::vector<std::string> ids;
        for (const auto& row : rows) {
            for (const auto& cell : row) {
                if (cell.kind() == ResultCell::Kind::entity) {
                    ids.push_back(cell.text());
                }
            }
        }
        std::map<std::string, std::string> resolved;
        if (!ids.empty() && labels) {
            resolved = labels(ids);
        }
        for (auto& row : rows) {
            for (auto& cell : row) {
                if (cell.kind() == ResultCell::Kind::entity) {
                    auto it = resolved.find(cell.text());
                    cell = ResultCell::literal(it != resolved.end() ? it->second : cell.text(), true);
                }
            }
        }
    }
    return deduplicate_rows(ResultTable::from_rows(table.columns, std::move(rows)));
}

} // namespace spinach::eval
