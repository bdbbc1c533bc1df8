#include "spinach/kb/client.hpp"

#include <array>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "spinach/common/text.hpp"

namespace spinach::kb {

using nlohmann::ordered_json;

namespace {

constexpr std::size_t label_batch_size = 50;

bool retriable_status(int status)
{
    return status == 429 || status == 502 || status == 503;
}

std::string english(const ordered_json& entity, const char* field)
{
    if (!entity.contains(field)) {
        return {};
    }
    const auto& f = entity.at(field);
    if (f.is_object() && f.contains("en")) {
        return f.at("en").value("value", std::string());
    }
    return {};
}

std::string strip_plus(std::string s)
{
    if (!s.empty() && s.front() == '+') {
        s.erase(0, 1);
    }
    return s;
}

/// Reads a snak into a Datum; entity labels and unit labels are filled later.
Datum datum_from_snak(const ordered_json& snak, std::vector<std::string>& unresolved, std::string& unit_id)
{
    unit_id.clear();
    auto snaktype = snak.value("snaktype", std::string("value"));
    if (snaktype == "novalue") {
        return Datum{ValueKind::no_value, "no value", {}};
    }
    if (snaktype == "somevalue") {
        return Datum{ValueKind::some_value, "unknown value", {}};
    }
    const auto& dv = snak.at("datavalue");
    auto type = dv.value("type", std::string());
    const auto& v = dv.at("value");
    if (type == "wikibase-entityid") {
        auto id = v.contains("id") ? v.at("id").get<std::string>()
                                   : fmt::format("Q{}", v.value("numeric-id", 0));
        unresolved.push_back(id);
        return Datum{ValueKind::entity, id, {}};
    }
    if (type == "string") {
        return Datum{ValueKind::literal, v.get<std::string>(), {}};
    }
    if (type == "monolingualtext") {
        return Datum{ValueKind::literal, v.value("text", std::string()), {}};
    }
    if (type == "quantity") {
        auto unit = v.value("unit", std::string("1"));
        if (auto id = id_from_uri(unit)) {
            unit_id = *id;
            unresolved.push_back(*id);
        }
        return Datum{ValueKind::quantity, strip_plus(v.value("amount", std::string())), {}};
    }
    if (type == "time") {
        return Datum{ValueKind::time, format_wikidata_time(v.value("time", std::string()), v.value("precision", 11)),
                     {}};
    }
    if (type == "globecoordinate") {
        return Datum{ValueKind::literal,
                     fmt::format("Point({} {})", v.value("longitude", 0.0), v.value("latitude", 0.0)), {}};
    }
    return Datum{ValueKind::literal, dv.at("value").dump(), {}};
}

SparqlTable parse_sparql_table(const ordered_json& doc)
{
    SparqlTable table;
    table.columns = doc.at("head").value("vars", std::vector<std::string>{});
    for (const auto& binding : doc.at("results").at("bindings")) {
        std::vector<SparqlTerm> row;
        row.reserve(table.columns.size());
        for (const auto& var : table.columns) {
            SparqlTerm term;
            if (binding.contains(var)) {
                const auto& b = binding.at(var);
                auto type = b.value("type", std::string());
                if (type == "uri") {
                    term.type = SparqlTerm::Type::uri;
                } else if (type == "bnode") {
                    term.type = SparqlTerm::Type::bnode;
                } else {
                    term.type = SparqlTerm::Type::literal;
                }
                term.value = b.value("value", std::string());
                term.datatype = b.value("datatype", std::string());
                term.lang = b.value("xml:lang", std::string());
            }
            row.push_back(std::move(term));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// First line of a service error body that names the failure, else a prefix of it.
std::string error_summary(const std::string& body)
{
    for (const auto& line : text::split_lines(body)) {
        if (line.find("Exception:") != std::string::npos) {
            return std::string(text::trim(line));
        }
    }
    auto trimmed = std::string(text::trim(body));
    if (trimmed.size() > 500) {
        trimmed.resize(500);
    }
    return trimmed;
}

} // namespace

WikidataClient::WikidataClient(ClientConfig config, std::shared_ptr<HttpTransport> transport,
                               std::shared_ptr<ResponseCache> cache, std::shared_ptr<RateLimiter> limiter)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(std::move(cache)),
      limiter_(std::move(limiter))
{
    config_.validate();
    if (!cache_ && config_.use_cache) {
        cache_ = std::make_shared<ResponseCache>(config_.cache_dir);
    }
    if (!limiter_) {
        limiter_ = std::make_shared<RateLimiter>(config_.min_request_interval);
    }
}

std::shared_ptr<WikidataClient> WikidataClient::create(ClientConfig config)
{
    auto transport = config.offline ? nullptr : make_default_transport(config.request_timeout);
    return std::make_shared<WikidataClient>(std::move(config), std::move(transport));
}

WikidataClient::RawReply WikidataClient::request(std::string_view operation, const HttpRequest& req,
                                                 bool cacheable_error_statuses)
{
    std::string cache_arg = req.method + " " + req.url + "\n" + req.body;
    if (cache_) {
        if (auto hit = cache_->get(operation, cache_arg)) {
            auto doc = nlohmann::json::parse(*hit);
            return RawReply{doc.at("status").get<int>(), doc.at("body").get<std::string>()};
        }
    }
    if (config_.offline || !transport_) {
        throw NetworkError(fmt::format("offline mode: no cached response for {} {}", operation, req.url));
    }

    HttpRequest full = req;
    full.headers.emplace_back("User-Agent", config_.user_agent);

    std::string last_failure;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0 && config_.retry_backoff.count() > 0) {
            std::this_thread::sleep_for(config_.retry_backoff * (1 << std::min(attempt - 1, 6)));
        }
        limiter_->acquire();
        HttpResponse resp;
        try {
            ++network_calls_;
            resp = transport_->send(full);
        } catch (const NetworkError& e) {
            last_failure = e.what();
            continue;
        }
        if (retriable_status(resp.status)) {
            last_failure = fmt::format("HTTP {} from {}", resp.status, req.url);
            continue;
        }
        bool cacheable = resp.status == 200 || (cacheable_error_statuses && resp.status >= 400 && resp.status < 600);
        if (cache_ && cacheable && resp.body.size() <= config_.max_response_bytes) {
            cache_->put(operation, cache_arg, nlohmann::json{{"status", resp.status}, {"body", resp.body}}.dump());
        }
        return RawReply{resp.status, std::move(resp.body)};
    }
    throw NetworkError(fmt::format("{} failed after {} attempts: {}", operation, config_.max_retries + 1, last_failure));
}

std::string WikidataClient::api_get(const std::vector<std::pair<std::string, std::string>>& params)
{
    HttpRequest req;
    req.url = build_url(config_.api_endpoint_url, params);
    req.headers.emplace_back("Accept", "application/json");
    auto reply = request(params.front().second, req, false);
    if (reply.status != 200) {
        throw NetworkError(fmt::format("API request failed with HTTP {}", reply.status));
    }
    return reply.body;
}

SearchResult WikidataClient::search_items(std::string_view query)
{
    auto q = std::string(text::trim(query));
    if (q.empty()) {
        throw EmptyQuery("search query is empty");
    }
    SearchResult result;
    auto search = [&](const char* type, std::size_t limit) {
        auto body = api_get({{"action", "wbsearchentities"},
                             {"search", q},
                             {"language", "en"},
                             {"uselang", "en"},
                             {"type", type},
                             {"limit", std::to_string(limit)},
                             {"format", "json"}});
        auto doc = ordered_json::parse(body);
        if (doc.contains("error")) {
            throw NetworkError("wbsearchentities error: " + doc.at("error").dump());
        }
        return doc.value("search", ordered_json::array());
    };
    for (const auto& hit : search("item", max_search_entities)) {
        if (result.entities.size() >= max_search_entities) {
            break;
        }
        if (auto id = EntityId::parse(hit.value("id", std::string()))) {
            result.entities.push_back(
                LabeledEntity{*id, hit.value("label", std::string()), hit.value("description", std::string())});
        }
    }
    for (const auto& hit : search("property", max_search_properties)) {
        if (result.properties.size() >= max_search_properties) {
            break;
        }
        if (auto id = PropertyId::parse(hit.value("id", std::string()))) {
            result.properties.push_back(
                LabeledProperty{*id, hit.value("label", std::string()), hit.value("description", std::string())});
        }
    }
    return result;
}

std::map<std::string, std::string> WikidataClient::fetch_labels(const std::vector<std::string>& ids)
{
    std::set<std::string> unique(ids.begin(), ids.end());
    std::vector<std::string> ordered(unique.begin(), unique.end());
    std::map<std::string, std::string> labels;
    for (std::size_t start = 0; start < ordered.size(); start += label_batch_size) {
        std::string joined;
        for (std::size_t i = start; i < std::min(ordered.size(), start + label_batch_size); ++i) {
            if (!joined.empty()) {
                joined.push_back('|');
            }
            joined += ordered[i];
        }
        auto doc = ordered_json::parse(api_get({{"action", "wbgetentities"},
                                                {"ids", joined},
                                                {"props", "labels"},
                                                {"languages", "en"},
                                                {"format", "json"}}));
        const auto entities = doc.value("entities", ordered_json::object());
        for (const auto& [id, entity] : entities.items()) {
            auto label = english(entity, "labels");
            if (!label.empty()) {
                labels[id] = label;
            }
        }
    }
    for (const auto& id : ordered) {
        labels.try_emplace(id, id);
    }
    return labels;
}

EntityEntry WikidataClient::fetch_entity_entry(const EntityId& id)
{
    auto doc = ordered_json::parse(api_get({{"action", "wbgetentities"},
                                            {"ids", id.str()},
                                            {"props", "labels|descriptions|claims"},
                                            {"languages", "en"},
                                            {"format", "json"}}));
    if (doc.contains("error")) {
        throw UnknownEntity(fmt::format("{}: {}", id.str(), doc.at("error").value("info", std::string("error"))));
    }
    const auto& entities = doc.value("entities", ordered_json::object());
    if (!entities.contains(id.str()) || entities.at(id.str()).contains("missing")) {
        throw UnknownEntity("no such entity: " + id.str());
    }
    const auto& entity = entities.at(id.str());

    EntityEntry entry{id, english(entity, "labels"), english(entity, "descriptions"), {}};
    std::vector<std::string> unresolved;
    // Quantity labels hold the unit id until labels are resolved.
    std::string unit;

    const auto claims = entity.value("claims", ordered_json::object());
    for (const auto& [pid, statements] : claims.items()) {
        auto property = PropertyId::parse(pid);
        if (!property) {
            continue;
        }
        unresolved.push_back(pid);
        Claim claim{*property, {}, {}};
        for (const auto& statement : statements) {
            if (statement.value("rank", std::string()) == "deprecated") {
                continue;
            }
            ClaimValue value{datum_from_snak(statement.at("mainsnak"), unresolved, unit), {}};
            std::string main_unit = unit;
            const auto& qualifiers = statement.value("qualifiers", ordered_json::object());
            auto order = statement.value("qualifiers-order", std::vector<std::string>{});
            if (order.empty()) {
                for (const auto& [qpid, _] : qualifiers.items()) {
                    order.push_back(qpid);
                }
            }
            for (const auto& qpid : order) {
                auto qprop = PropertyId::parse(qpid);
                if (!qprop || !qualifiers.contains(qpid)) {
                    continue;
                }
                unresolved.push_back(qpid);
                for (const auto& snak : qualifiers.at(qpid)) {
                    value.qualifiers.push_back(Qualifier{*qprop, {}, datum_from_snak(snak, unresolved, unit)});
                    if (!unit.empty()) {
                        value.qualifiers.back().value.label = unit;
                    }
                }
            }
            if (!main_unit.empty()) {
                value.datum.label = main_unit;
            }
            claim.values.push_back(std::move(value));
        }
        if (!claim.values.empty()) {
            entry.claims.push_back(std::move(claim));
        }
    }

    auto labels = fetch_labels(unresolved);
    auto resolve = [&](Datum& d) {
        if (d.kind == ValueKind::entity || (d.kind == ValueKind::quantity && !d.label.empty())) {
            const auto& key = d.kind == ValueKind::entity ? d.value : d.label;
            auto it = labels.find(key);
            d.label = it != labels.end() ? it->second : key;
        }
    };
    for (auto& claim : entry.claims) {
        claim.property_label = labels.count(claim.property.str()) ? labels.at(claim.property.str()) : claim.property.str();
        for (auto& value : claim.values) {
            resolve(value.datum);
            for (auto& q : value.qualifiers) {
                q.property_label = labels.count(q.property.str()) ? labels.at(q.property.str()) : q.property.str();
                resolve(q.value);
            }
        }
    }
    if (entry.label.empty()) {
        entry.label = id.str();
    }
    return entry;
}

PropertyExamples WikidataClient::fetch_property_examples(const PropertyId& id)
{
    auto query = fmt::format("SELECT ?s ?o WHERE {{ ?s wdt:{} ?o }} LIMIT {}", id.str(), property_example_count);
    auto response = run_sparql(query);
    if (response.is_error()) {
        throw NetworkError(fmt::format("property examples for {}: {} error: {}", id.str(),
                                       to_string(response.error().kind), response.error().message));
    }
    PropertyExamples examples;
    std::vector<std::string> unresolved;
    if (response.is_table()) {
        for (const auto& row : response.table().rows) {
            if (row.size() < 2) {
                continue;
            }
            auto sid = id_from_uri(row[0].value);
            auto subject = sid ? EntityId::parse(*sid) : std::nullopt;
            if (!subject) {
                continue;
            }
            Datum object;
            if (row[1].type == SparqlTerm::Type::uri) {
                if (auto oid = id_from_uri(row[1].value)) {
                    object = Datum{ValueKind::entity, *oid, {}};
                    unresolved.push_back(*oid);
                } else {
                    object = Datum{ValueKind::literal, row[1].value, {}};
                }
            } else {
                object = Datum{ValueKind::literal, row[1].value, {}};
            }
            unresolved.push_back(subject->str());
            examples.push_back(PropertyExample{*subject, {}, std::move(object)});
        }
    }
    if (examples.empty()) {
        auto doc = ordered_json::parse(api_get({{"action", "wbgetentities"},
                                                {"ids", id.str()},
                                                {"props", "info"},
                                                {"format", "json"}}));
        const auto& entities = doc.value("entities", ordered_json::object());
        if (doc.contains("error") || !entities.contains(id.str()) || entities.at(id.str()).contains("missing")) {
            throw UnknownProperty("no such property: " + id.str());
        }
        return examples;
    }
    auto labels = fetch_labels(unresolved);
    for (auto& ex : examples) {
        ex.subject_label = labels.at(ex.subject.str());
        if (ex.object.kind == ValueKind::entity) {
            ex.object.label = labels.at(ex.object.value);
        }
    }
    return examples;
}

SparqlResponse WikidataClient::run_sparql(std::string_view query)
{
    if (text::trim(query).empty()) {
        return SparqlResponse(SparqlError{SparqlErrorKind::syntax, "empty query"});
    }
    HttpRequest req;
    req.method = "POST";
    req.url = config_.sparql_endpoint_url;
    req.content_type = "application/x-www-form-urlencoded";
    req.body = "query=" + url_encode(query) + "&format=json";
    req.headers.emplace_back("Accept", "application/sparql-results+json");

    RawReply reply;
    try {
        reply = request("sparql", req, true);
    } catch (const NetworkError& e) {
        return SparqlResponse(SparqlError{SparqlErrorKind::network, e.what()});
    }

    const bool timed_out = reply.body.find("TimeoutException") != std::string::npos;
    if (reply.status == 408 || reply.status == 504 || (reply.status >= 500 && timed_out)) {
        return SparqlResponse(SparqlError{SparqlErrorKind::timeout, "query timed out: " + error_summary(reply.body)});
    }
    if (reply.status == 413) {
        return SparqlResponse(SparqlError{SparqlErrorKind::too_large, "response too large"});
    }
    if (reply.status == 400 || (reply.status >= 500 && reply.body.find("MalformedQueryException") != std::string::npos)) {
        return SparqlResponse(SparqlError{SparqlErrorKind::syntax, error_summary(reply.body)});
    }
    if (reply.status != 200) {
        return SparqlResponse(SparqlError{SparqlErrorKind::network,
                                          fmt::format("HTTP {}: {}", reply.status, error_summary(reply.body))});
    }
    if (reply.body.size() > config_.max_response_bytes) {
        return SparqlResponse(SparqlError{SparqlErrorKind::too_large,
                                          fmt::format("response of {} bytes exceeds the {} byte limit",
                                                      reply.body.size(), config_.max_response_bytes)});
    }
    auto doc = ordered_json::parse(reply.body, nullptr, false);
    if (doc.is_discarded()) {
        return SparqlResponse(SparqlError{SparqlErrorKind::network, "malformed SPARQL JSON response"});
    }
    try {
        if (doc.contains("boolean")) {
            return SparqlResponse(doc.at("boolean").get<bool>());
        }
        return SparqlResponse(parse_sparql_table(doc));
    } catch (const std::exception& e) {
        return SparqlResponse(SparqlError{SparqlErrorKind::network, std::string("unexpected SPARQL JSON: ") + e.what()});
    }
}

std::string format_wikidata_time(std::string_view time, int precision)
{
    static constexpr std::array<const char*, 12> months{"January", "February", "March",     "April",
                                                        "May",     "June",     "July",      "August",
                                                        "September", "October", "November", "December"};
    bool negative = !time.empty() && time.front() == '-';
    if (!time.empty() && (time.front() == '+' || time.front() == '-')) {
        time.remove_prefix(1);
    }
    auto dash1 = time.find('-');
    if (dash1 == std::string_view::npos) {
        return std::string(time);
    }
    long long year = 0;
    int month = 0;
    int day = 0;
    try {
        year = std::stoll(std::string(time.substr(0, dash1)));
        month = std::stoi(std::string(time.substr(dash1 + 1, 2)));
        day = std::stoi(std::string(time.substr(dash1 + 4, 2)));
    } catch (const std::exception&) {
        return std::string(time);
    }
    auto year_text = negative ? fmt::format("{} BCE", year) : fmt::format("{}", year);
    if (precision >= 11 && month >= 1 && month <= 12 && day >= 1) {
        return fmt::format("{} {} {}", day, months[month - 1], year_text);
    }
    if (precision == 10 && month >= 1 && month <= 12) {
        return fmt::format("{} {}", months[month - 1], year_text);
    }
    if (precision == 8) {
        return fmt::format("{}s", year - year % 10);
    }
    if (precision == 7) {
        return fmt::format("{}. century", (year + 99) / 100);
    }
    return year_text;
}

} // namespace spinach::kb
