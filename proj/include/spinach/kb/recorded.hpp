#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include <nlohmann/json.hpp>

#include "spinach/kb/knowledge_base.hpp"

namespace spinach::kb {

/// Records knowledge-base answers as structured payloads, or replays them.
///
/// With an inner knowledge base every lookup is forwarded and its result
/// (including UnknownEntity/UnknownProperty/EmptyQuery failures) stored.
/// Without one, lookups are answered from the records only: a missing
/// record throws NetworkError, or for SPARQL yields a network SparqlError.
/// SPARQL records are keyed by the whitespace-collapsed query.
class RecordedKnowledgeBase final : public KnowledgeBase {
public:
    explicit RecordedKnowledgeBase(std::shared_ptr<KnowledgeBase> inner = nullptr);

    /// Reads records written by `save`. Throws Error on malformed files.
    static std::shared_ptr<RecordedKnowledgeBase> load(const std::filesystem::path& path);

    /// Writes all records as a JSON array sorted by (operation, argument).
    void save(const std::filesystem::path& path) const;

    /// Adds or replaces one record; `payload` uses the kb::encode format.
    void put(const std::string& operation, const std::string& argument, nlohmann::json payload);

    SearchResult search_items(std::string_view query) override;
    EntityEntry fetch_entity_entry(const EntityId& id) override;
    PropertyExamples fetch_property_examples(const PropertyId& id) override;
    SparqlResponse run_sparql(std::string_view query) override;
    std::map<std::string, std::string> fetch_labels(const std::vector<std::string>& ids) override;

    std::size_t size() const;

private:
    template <class F>
    nlohmann::json lookup(const std::string& operation, const std::string& argument, F&& live);

    std::shared_ptr<KnowledgeBase> inner_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, nlohmann::json> records_;
};

} // namespace spinach::kb
