#include "spinach/bench/gold.hpp"

#include <ctime>
#include <fstream>

#include <fmt/chrono.h>
#include <nlohmann/json.hpp>

#include "spinach/common/digest.hpp"
#include "spinach/kb/json.hpp"

namespace spinach::bench {

namespace {

std::string utc_now() { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr))); }

} // namespace

GoldStore::GoldStore(std::optional<std::filesystem::path> dir, Clock clock)
    : dir_(std::move(dir)), clock_(clock ? std::move(clock) : Clock(utc_now))
{
    if (dir_) {
        std::filesystem::create_directories(*dir_);
    }
}

std::size_t GoldStore::executions() const
{
    std::lock_guard lock(mutex_);
    return executions_;
}

GoldSnapshot GoldStore::fetch(const std::string& sparql, kb::KnowledgeBase& kb)
{
    const auto digest = sha256_hex(sparql);
    std::promise<GoldSnapshot> promise;
    std::shared_future<GoldSnapshot> future;
    bool owner = false;
    {
        std::lock_guard lock(mutex_);
        if (auto it = entries_.find(digest); it != entries_.end()) {
            future = it->second;
        } else {
            future = promise.get_future().share();
            entries_.emplace(digest, future);
            owner = true;
        }
    }
    if (!owner) {
        return future.get();
    }

    try {
        std::optional<GoldSnapshot> snap;
        const auto file = dir_ ? std::optional(*dir_ / (digest + ".json")) : std::nullopt;
        if (file && std::filesystem::exists(*file)) {
            std::ifstream in(*file);
            auto j = nlohmann::json::parse(in);
            snap = GoldSnapshot{kb::decode_sparql_response(j.at("response")), j.value("snapshot", "")};
        } else {
            auto response = kb.run_sparql(sparql);
            {
                std::lock_guard lock(mutex_);
                ++executions_;
            }
            snap = GoldSnapshot{response, clock_()};
            if (file && !response.is_error()) {
                nlohmann::json j{{"sparql", sparql}, {"snapshot", snap->snapshot}, {"response", kb::encode(response)}};
                auto tmp = *file;
                tmp += ".tmp";
                std::ofstream(tmp) << j.dump(2) << '\n';
                std::filesystem::rename(tmp, *file);
            }
        }
        promise.set_value(*snap);
        if (snap->response.is_error()) {
            // Let a later call retry a failed execution.
            std::lock_guard lock(mutex_);
            entries_.erase(digest);
        }
        return *snap;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        entries_.erase(digest);
        throw;
    }
}

eval::LabelResolver label_resolver(kb::KnowledgeBase& kb)
{
    return [&kb](const std::vector<std::string>& ids) { return kb.fetch_labels(ids); };
}

MaterializedGold materialize_gold(const DatasetExample& example, kb::KnowledgeBase& kb, GoldStore& store,
                                   eval::NormalizeMode mode)
{
    if (example.gold_results) {
        return {*example.gold_results, ""};
    }
    auto snap = store.fetch(example.gold_sparql, kb);
    if (snap.response.is_error()) {
        const auto& e = snap.response.error();
        throw GoldExecutionError(std::string(kb::to_string(e.kind)),
                                 fmt::format("gold query for {} failed ({}): {}", example.id, kb::to_string(e.kind),
                                             e.message));
    }
    if (!snap.response.has_answer()) {
        throw GoldExecutionError("empty", "gold query for " + example.id + " returned no rows");
    }
    try {
        return {eval::normalize_results(snap.response, mode, label_resolver(kb)), snap.snapshot};
    } catch (const eval::UnresolvableBinding& e) {
        throw GoldExecutionError("unresolvable", "gold result for " + example.id + ": " + e.what());
    }
}

} // namespace spinach::bench
