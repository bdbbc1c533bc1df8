#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "spinach/bench/dataset.hpp"
#include "spinach/eval/normalize.hpp"
#include "spinach/kb/knowledge_base.hpp"

namespace spinach::bench {

/// The gold query failed or returned nothing. `kind` is a SPARQL error kind
/// name ("timeout", "syntax", ...), "empty", or "unresolvable".
class GoldExecutionError : public Error {
public:
    GoldExecutionError(std::string kind, const std::string& what) : Error(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

struct GoldSnapshot {
    kb::SparqlResponse response;
    /// UTC time the query was executed, ISO 8601.
    std::string snapshot;
};

/// Raw gold responses keyed by sha256 of the query text, in memory and
/// optionally as `<digest>.json` files. Each query is executed at most once
/// per store, even under concurrent requests for it.
class GoldStore {
public:
    using Clock = std::function<std::string()>;

    explicit GoldStore(std::optional<std::filesystem::path> dir = std::nullopt, Clock clock = {});

    /// Cached snapshot, or runs `sparql` on `kb` and stores the result.
    /// Error responses are not cached.
    GoldSnapshot fetch(const std::string& sparql, kb::KnowledgeBase& kb);

    /// Queries actually sent to a knowledge base by this store.
    std::size_t executions() const;

private:
    std::optional<std::filesystem::path> dir_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_future<GoldSnapshot>> entries_;
    std::size_t executions_ = 0;
};

struct MaterializedGold {
    eval::ResultTable table;
    /// Empty when the example carried its own results.
    std::string snapshot;
};

/// Executes (or loads) the example's gold query and normalizes it. Throws
/// GoldExecutionError on service errors, empty results, or unresolvable
/// bindings.
MaterializedGold materialize_gold(const DatasetExample& example, kb::KnowledgeBase& kb, GoldStore& store,
                                   eval::NormalizeMode mode = eval::NormalizeMode::id);

/// Label resolver backed by a knowledge base.
eval::LabelResolver label_resolver(kb::KnowledgeBase& kb);

} // namespace spinach::bench
