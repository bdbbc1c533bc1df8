#pragma once

#include <string>
#include <string_view>

#include "spinach/agent/state.hpp"
#include "spinach/kb/types.hpp"
#include "spinach/llm/gateway.hpp"

namespace spinach::llm {

/// The full policy prompt for a question and the current history.
std::string render_policy_prompt(std::string_view question, const agent::AgentState& state);

/// The policy request whose rendering is `render_policy_prompt(question, state)`.
LlmRequest policy_request(std::string_view question, const agent::AgentState& state);

struct ParsedAgentOutput {
    std::string thought;
    agent::Action action;
    bool operator==(const ParsedAgentOutput&) const = default;
};

/// Model output with no recognizable action. Retriable.
class UnparseableOutput : public Error {
public:
    using Error::Error;
};

/// Extracts a thought and exactly one action. Accepts markdown emphasis,
/// code fences and quoting around labels and arguments. Anything from an
/// "Observation:" line on is ignored. A SPARQL argument runs to the last
/// closing parenthesis; other arguments end at the last one on the action line.
ParsedAgentOutput parse_agent_output(std::string_view raw);

/// "Thought: ...\nAction: ..." in canonical form.
std::string render_agent_output(const ParsedAgentOutput& output);

/// Asks the model which claims of `entry` matter for `question` and keeps
/// only those. The result's claims are always a subset of the input's; any
/// failure (provider error, malformed JSON) returns `entry` unchanged.
kb::EntityEntry prune_entry(LlmGateway& gateway, std::string_view question, const kb::EntityEntry& entry);

/// The pruning step without the model call: applies a raw model reply to an entry.
kb::EntityEntry apply_prune_reply(std::string_view reply, const kb::EntityEntry& entry);

} // namespace spinach::llm
