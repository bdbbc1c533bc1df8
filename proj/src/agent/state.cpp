#include "spinach/agent/state.hpp"

namespace spinach::agent {

std::string render_history(const AgentState& state)
{
    std::string out;
    for (const auto& step : state.steps) {
        if (!out.empty()) {
            out += "\n\n";
        }
        out += "Thought: " + step.thought + "\nAction: " + render_action(step.action);
        if (!std::holds_alternative<Stop>(step.action)) {
            out += "\nObservation: " + step.observation;
        }
    }
    return out;
}

} // namespace spinach::agent
