#pragma once

#include <atomic>
#include <memory>

#include "spinach/kb/cache.hpp"
#include "spinach/kb/http.hpp"
#include "spinach/kb/knowledge_base.hpp"
#include "spinach/kb/rate_limiter.hpp"

namespace spinach::kb {

/// Wikidata access through the MediaWiki action API (wbsearchentities,
/// wbgetentities) and the SPARQL query service.
///
/// Safe for concurrent use: the cache and rate limiter are shared and
/// internally synchronized, the rest is immutable after construction.
class WikidataClient final : public KnowledgeBase {
public:
    WikidataClient(ClientConfig config, std::shared_ptr<HttpTransport> transport,
                   std::shared_ptr<ResponseCache> cache = nullptr, std::shared_ptr<RateLimiter> limiter = nullptr);

    /// Builds transport, cache and limiter from the configuration.
    static std::shared_ptr<WikidataClient> create(ClientConfig config);

    SearchResult search_items(std::string_view query) override;
    EntityEntry fetch_entity_entry(const EntityId& id) override;
    PropertyExamples fetch_property_examples(const PropertyId& id) override;
    SparqlResponse run_sparql(std::string_view query) override;
    std::map<std::string, std::string> fetch_labels(const std::vector<std::string>& ids) override;

    const ClientConfig& config() const { return config_; }

    /// Number of requests that actually reached the transport.
    std::size_t network_calls() const { return network_calls_.load(); }

private:
    struct RawReply {
        int status = 0;
        std::string body;
    };

    RawReply request(std::string_view operation, const HttpRequest& req, bool cacheable_error_statuses);
    std::string api_get(const std::vector<std::pair<std::string, std::string>>& params);

    ClientConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<RateLimiter> limiter_;
    std::atomic<std::size_t> network_calls_{0};
};

/// Formats a Wikidata time value (`+2021-06-23T00:00:00Z`, precision 11) as
/// "23 June 2021"; coarser precisions drop the finer fields.
std::string format_wikidata_time(std::string_view time, int precision);

} // namespace spinach::kb
