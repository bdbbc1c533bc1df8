#include "spinach/bench/config.hpp"

#include <fstream>
#include <set>

namespace spinach::bench {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed)
{
    if (!j.is_object()) {
        throw InvalidArgument("config section '" + std::string(section) + "' must be an object");
    }
    std::set<std::string_view> ok(allowed);
    for (const auto& [key, _] : j.items()) {
        if (!ok.contains(key)) {
            throw InvalidArgument("unknown config key '" + std::string(section) + "." + key + "'");
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception&) {
            throw InvalidArgument(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

void read_ms(const json& j, const char* key, std::chrono::milliseconds& out)
{
    long long ms = out.count();
    read(j, key, ms);
    out = std::chrono::milliseconds(ms);
}

} // namespace

AppConfig AppConfig::from_json(const json& j)
{
    AppConfig c;
    check_keys(j, "", {"kb", "llm", "agent", "bench"});
    if (j.contains("kb")) {
        const auto& k = j.at("kb");
        check_keys(k, "kb", {"sparql_endpoint", "api_endpoint", "cache_dir", "timeout_ms", "min_request_interval_ms",
                             "max_retries", "offline", "use_cache"});
        read(k, "sparql_endpoint", c.kb.sparql_endpoint_url);
        read(k, "api_endpoint", c.kb.api_endpoint_url);
        if (k.contains("cache_dir")) {
            std::string dir;
            read(k, "cache_dir", dir);
            c.kb.cache_dir = dir;
        }
        read_ms(k, "timeout_ms", c.kb.request_timeout);
        read_ms(k, "min_request_interval_ms", c.kb.min_request_interval);
        read(k, "max_retries", c.kb.max_retries);
        read(k, "offline", c.kb.offline);
        read(k, "use_cache", c.kb.use_cache);
    }
    if (j.contains("llm")) {
        const auto& l = j.at("llm");
        check_keys(l, "llm", {"endpoint", "model", "api_key_env", "timeout_ms", "max_retries", "call_budget"});
        read(l, "endpoint", c.llm.endpoint);
        read(l, "model", c.llm.model);
        read(l, "api_key_env", c.llm.api_key_env);
        read_ms(l, "timeout_ms", c.llm.timeout);
        read(l, "max_retries", c.gateway.max_retries);
        if (l.contains("call_budget")) {
            std::size_t budget = 0;
            read(l, "call_budget", budget);
            c.gateway.call_budget = budget;
        }
    }
    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        check_keys(a, "agent", {"max_steps", "max_resets", "max_parse_retries", "action_timeout_ms", "prune_entries"});
        read(a, "max_steps", c.agent.max_steps);
        read(a, "max_resets", c.agent.max_resets);
        read(a, "max_parse_retries", c.agent.max_parse_retries);
        read_ms(a, "action_timeout_ms", c.agent.action_timeout);
        read(a, "prune_entries", c.agent.prune_entries);
    }
    if (j.contains("bench")) {
        const auto& b = j.at("bench");
        check_keys(b, "bench", {"parallelism", "gold_cache_dir"});
        read(b, "parallelism", c.parallelism);
        if (b.contains("gold_cache_dir")) {
            std::string dir;
            read(b, "gold_cache_dir", dir);
            c.gold_cache_dir = dir;
        }
    }
    c.kb.validate();
    c.agent.validate();
    if (c.parallelism == 0) {
        throw InvalidArgument("bench.parallelism must be at least 1");
    }
    return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("config " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

AppConfig AppConfig::with_env_overrides() const
{
    AppConfig c = *this;
    c.kb = kb.with_env_overrides();
    c.llm = llm.with_env_overrides();
    return c;
}

} // namespace spinach::bench
