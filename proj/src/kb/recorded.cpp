#include "spinach/kb/recorded.hpp"

#include <fstream>

#include "spinach/common/text.hpp"
#include "spinach/kb/json.hpp"

namespace spinach::kb {

namespace {

nlohmann::json failure(std::string_view kind, const std::exception& e)
{
    return {{"error", kind}, {"message", e.what()}};
}

void rethrow_recorded(const nlohmann::json& payload)
{
    if (!payload.is_object() || !payload.contains("error")) {
        return;
    }
    const auto kind = payload.at("error").get<std::string>();
    const auto message = payload.value("message", "");
    if (kind == "unknown_entity") {
        throw UnknownEntity(message);
    }
    if (kind == "unknown_property") {
        throw UnknownProperty(message);
    }
    if (kind == "empty_query") {
        throw EmptyQuery(message);
    }
    throw NetworkError(message);
}

} // namespace

RecordedKnowledgeBase::RecordedKnowledgeBase(std::shared_ptr<KnowledgeBase> inner) : inner_(std::move(inner)) {}

std::shared_ptr<RecordedKnowledgeBase> RecordedKnowledgeBase::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open knowledge-base records " + path.string());
    }
    auto kb = std::make_shared<RecordedKnowledgeBase>();
    try {
        auto doc = nlohmann::json::parse(in);
        for (const auto& r : doc) {
            kb->put(r.at("operation").get<std::string>(), r.at("argument").get<std::string>(), r.at("payload"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(path.string() + ": malformed knowledge-base records: " + e.what());
    }
    return kb;
}

void RecordedKnowledgeBase::save(const std::filesystem::path& path) const
{
    auto doc = nlohmann::json::array();
    {
        std::lock_guard lock(mutex_);
        for (const auto& [key, payload] : records_) {
            doc.push_back({{"operation", key.first}, {"argument", key.second}, {"payload", payload}});
        }
    }
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
}

void RecordedKnowledgeBase::put(const std::string& operation, const std::string& argument, nlohmann::json payload)
{
    std::lock_guard lock(mutex_);
    records_[{operation, argument}] = std::move(payload);
}

std::size_t RecordedKnowledgeBase::size() const
{
    std::lock_guard lock(mutex_);
    return records_.size();
}

template <class F>
nlohmann::json RecordedKnowledgeBase::lookup(const std::string& operation, const std::string& argument, F&& live)
{
    {
        std::lock_guard lock(mutex_);
        if (auto it = records_.find({operation, argument}); it != records_.end()) {
            return it->second;
        }
    }
    if (!inner_) {
        throw NetworkError("no recorded " + operation + " result for: " + argument);
    }
    nlohmann::json payload;
    try {
        payload = live();
    } catch (const UnknownEntity& e) {
        payload = failure("unknown_entity", e);
    } catch (const UnknownProperty& e) {
        payload = failure("unknown_property", e);
    } catch (const EmptyQuery& e) {
        payload = failure("empty_query", e);
    }
    put(operation, argument, payload);
    return payload;
}

SearchResult RecordedKnowledgeBase::search_items(std::string_view query)
{
    auto p = lookup("search", std::string(query), [&] { return encode(inner_->search_items(query)); });
    rethrow_recorded(p);
    return decode_search_result(p);
}

EntityEntry RecordedKnowledgeBase::fetch_entity_entry(const EntityId& id)
{
    auto p = lookup("entry", id.str(), [&] { return encode(inner_->fetch_entity_entry(id)); });
    rethrow_recorded(p);
    return decode_entity_entry(p);
}

PropertyExamples RecordedKnowledgeBase::fetch_property_examples(const PropertyId& id)
{
    auto p = lookup("examples", id.str(), [&] { return encode(inner_->fetch_property_examples(id)); });
    rethrow_recorded(p);
    return decode_property_examples(p);
}

SparqlResponse RecordedKnowledgeBase::run_sparql(std::string_view query)
{
    try {
        return decode_sparql_response(
            lookup("sparql", text::collapse_whitespace(query), [&] { return encode(inner_->run_sparql(query)); }));
    } catch (const NetworkError& e) {
        return SparqlError{SparqlErrorKind::network, e.what()};
    }
}

std::map<std::string, std::string> RecordedKnowledgeBase::fetch_labels(const std::vector<std::string>& ids)
{
    std::map<std::string, std::string> out;
    std::vector<std::string> missing;
    {
        std::lock_guard lock(mutex_);
        for (const auto& id : ids) {
            if (auto it = records_.find({"label", id}); it != records_.end()) {
                out[id] = it->second.get<std::string>();
            } else {
                missing.push_back(id);
            }
        }
    }
    if (missing.empty()) {
        return out;
    }
    if (!inner_) {
        // Unrecorded labels fall back to the id, as the live client does for unlabeled items.
        for (const auto& id : missing) {
            out[id] = id;
        }
        return out;
    }
    for (const auto& [id, label] : inner_->fetch_labels(missing)) {
        put("label", id, label);
        out[id] = label;
    }
    return out;
}

} // namespace spinach::kb
