#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "spinach/agent/agent.hpp"
#include "spinach/bench/runner.hpp"
#include "spinach/kb/types.hpp"
#include "spinach/llm/gateway.hpp"

namespace spinach::bench {

/// Settings for the command-line tool. Every field has a default; a config
/// file only needs the keys it changes:
///
///     {
///       "kb":    {"sparql_endpoint": "...", "api_endpoint": "...", "cache_dir": "...",
///                 "timeout_ms": 60000, "min_request_interval_ms": 100, "offline": false},
///       "llm":   {"endpoint": "...", "model": "gpt-4o", "api_key_env": "OPENAI_API_KEY",
///                 "timeout_ms": 120000, "max_retries": 3, "call_budget": 200},
///       "agent": {"max_steps": 30, "max_resets": 3, "max_parse_retries": 3, "prune_entries": true},
///       "bench": {"parallelism": 4, "gold_cache_dir": "..."}
///     }
///
/// Environment overrides for endpoints are applied after the file.
struct AppConfig {
    kb::ClientConfig kb;
    llm::OpenAiConfig llm;
    llm::GatewayConfig gateway;
    agent::AgentConfig agent;
    std::size_t parallelism = 4;
    std::optional<std::filesystem::path> gold_cache_dir;

    /// Throws InvalidArgument on unknown keys or wrongly typed values.
    static AppConfig from_json(const nlohmann::json& j);
    static AppConfig load(const std::filesystem::path& path);
    AppConfig with_env_overrides() const;
};

} // namespace spinach::bench
