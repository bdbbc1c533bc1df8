#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spinach/agent/action.hpp"
#include "spinach/kb/render.hpp"

namespace spinach::agent {

/// One thought, action and observation. `payload` holds the structured
/// result the observation was rendered from (absent for stop).
struct Step {
    std::string thought;
    Action action;
    std::string observation;
    std::optional<kb::ObservationPayload> payload;
    /// Position of this action among every action the run has taken,
    /// including ones later discarded by resets.
    std::size_t action_index = 0;
};

struct AgentState {
    std::vector<Step> steps;
    int resets = 0;
};

/// "Thought: ...\nAction: ...\nObservation: ..." blocks separated by blank lines.
std::string render_history(const AgentState& state);

} // namespace spinach::agent
