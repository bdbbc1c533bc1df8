#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinach/agent/state.hpp"
#include "spinach/kb/knowledge_base.hpp"
#include "spinach/llm/gateway.hpp"

namespace spinach::agent {

class PolicyFailure : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct AgentConfig {
    int max_steps = 30;
    int max_resets = 3;
    /// Consecutive unparseable policy outputs tolerated before PolicyFailure.
    int max_parse_retries = 3;
    /// Upper bound for a single knowledge-base action (applied to the client's request timeout).
    std::chrono::milliseconds action_timeout{60'000};
    bool prune_entries = true;

    void validate() const;
    nlohmann::json to_json() const;
};

enum class StopReason { stopped, budget_exhausted, reset_limit };
std::string_view to_string(StopReason reason);

enum class ResetReason { repetition, empty_stop };
std::string_view to_string(ResetReason reason);

/// A rollback. `trigger` is the action that caused it (never executed) and
/// `discarded` the steps removed from the state.
struct ResetEvent {
    ResetReason reason;
    std::size_t to_index = 0;
    Step trigger;
    std::vector<Step> discarded;
};

struct AgentOutcome {
    std::string question;
    AgentConfig config;
    std::optional<std::string> final_sparql;
    std::optional<kb::SparqlResponse> final_result;
    AgentState trace;
    StopReason stop_reason = StopReason::stopped;
    /// Every parsed action, including ones discarded or rejected by resets.
    int actions_taken = 0;
    std::vector<ResetEvent> resets;
    /// Raw policy outputs that failed to parse, keyed by the action index they preceded.
    std::vector<std::pair<std::size_t, std::string>> unparseable;
};

/// Index of the first earlier step with the same (action, argument) as
/// `next`, provided the immediately preceding step also matches it.
std::optional<std::size_t> detect_repetition(const AgentState& state, const Action& next);

/// The steps strictly before `to_index`, with the reset counter incremented.
AgentState reset_state(const AgentState& state, std::size_t to_index);

enum class StopVerdict { accept, reset_to_beginning };

/// Accepts only when the most recent execute_sparql returned a boolean or at least one row.
StopVerdict validate_stop(const AgentState& state);

struct Observation {
    std::string text;
    std::optional<kb::ObservationPayload> payload;
};

/// Runs one action against the knowledge base. Failures become observation
/// text. Entity entries go through the pruning prompt when `pruner` is set.
Observation apply_action(const Action& action, kb::KnowledgeBase& kb, llm::LlmGateway* pruner,
                         std::string_view question);

/// The agent loop. The same gateway serves policy and pruning calls.
AgentOutcome run_agent(std::string_view question, const AgentConfig& config, llm::LlmGateway& gateway,
                       kb::KnowledgeBase& kb);

/// One JSON document per run: question, config, steps, resets, outcome.
nlohmann::ordered_json trace_to_json(const AgentOutcome& outcome);

/// Rebuilds, in order, every policy prompt the run sent, from a trace document.
std::vector<std::string> reconstruct_policy_prompts(const nlohmann::ordered_json& trace);

} // namespace spinach::agent
