#include "spinach/kb/types.hpp"

#include <cstdlib>

namespace spinach::kb {

std::string_view to_string(SparqlErrorKind kind)
{
    switch (kind) {
    case SparqlErrorKind::syntax: return "syntax";
    case SparqlErrorKind::timeout: return "timeout";
    case SparqlErrorKind::network: return "network";
    case SparqlErrorKind::too_large: return "too-large";
    }
    return "network";
}

SparqlResponse::SparqlResponse(SparqlTable table) : value_(std::move(table))
{
    const auto& t = std::get<SparqlTable>(value_);
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) {
            throw InvalidArgument("SPARQL result row width does not match column count");
        }
    }
}

bool SparqlResponse::has_answer() const
{
    return is_boolean() || (is_table() && !table().rows.empty());
}

void ClientConfig::validate() const
{
    if (sparql_endpoint_url.empty() || api_endpoint_url.empty()) {
        throw InvalidArgument("endpoint URLs must be set");
    }
    if (request_timeout <= std::chrono::milliseconds::zero() || request_timeout > std::chrono::seconds(60)) {
        throw InvalidArgument("request_timeout must be in (0, 60s]");
    }
    if (min_request_interval < std::chrono::milliseconds::zero()) {
        throw InvalidArgument("min_request_interval must be >= 0");
    }
    if (max_retries < 0) {
        throw InvalidArgument("max_retries must be >= 0");
    }
    if (user_agent.empty()) {
        throw InvalidArgument("a descriptive user agent is required");
    }
}

ClientConfig ClientConfig::with_env_overrides() const
{
    ClientConfig out = *this;
    if (const char* v = std::getenv("SPINACH_SPARQL_ENDPOINT"); v && *v) {
        out.sparql_endpoint_url = v;
    }
    if (const char* v = std::getenv("SPINACH_API_ENDPOINT"); v && *v) {
        out.api_endpoint_url = v;
    }
    if (const char* v = std::getenv("SPINACH_CACHE_DIR"); v && *v) {
        out.cache_dir = std::filesystem::path(v);
    }
    return out;
}

} // namespace spinach::kb
